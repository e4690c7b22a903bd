// View state with URL round-tripping, so any explorer view is a deep link.

export interface ViewState {
  sessionId: string;
  lambda: number;
  boundaryOn: boolean;
  hiddenClasses: string[];
}

export const DEFAULT_LAMBDA = 0.5;

/** Clamp into [0, 1] and snap to 0.01 steps. */
export function snapLambda(value: number): number {
  const clamped = Math.min(1, Math.max(0, value));
  return Math.round(clamped * 100) / 100;
}

export function defaultState(sessionId = ""): ViewState {
  return { sessionId, lambda: DEFAULT_LAMBDA, boundaryOn: false,
           hiddenClasses: [] };
}

export function stateToQuery(state: ViewState): string {
  const params = new URLSearchParams();
  if (state.sessionId) {
    params.set("session", state.sessionId);
  }
  params.set("lambda", state.lambda.toFixed(2));
  if (state.boundaryOn) {
    params.set("boundary", "1");
  }
  if (state.hiddenClasses.length) {
    params.set("hidden", state.hiddenClasses.join(","));
  }
  return params.toString();
}

export function stateFromQuery(query: string): ViewState {
  const params = new URLSearchParams(query);
  const state = defaultState(params.get("session") ?? "");
  const lambda = params.get("lambda");
  if (lambda !== null && !Number.isNaN(Number(lambda))) {
    state.lambda = snapLambda(Number(lambda));
  }
  state.boundaryOn = params.get("boundary") === "1";
  const hidden = params.get("hidden");
  if (hidden) {
    state.hiddenClasses = hidden.split(",").filter((s) => s.length > 0);
  }
  return state;
}

export function toggleClass(state: ViewState, label: string): ViewState {
  const hidden = state.hiddenClasses.includes(label)
    ? state.hiddenClasses.filter((c) => c !== label)
    : [...state.hiddenClasses, label];
  return { ...state, hiddenClasses: hidden };
}
