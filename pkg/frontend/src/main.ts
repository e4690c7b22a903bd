// Explorer wiring: slider -> debounced projection fetch -> rendered views,
// with the view state mirrored into the URL for deep linking.

import { Api, ApiError, ProjectionPayload } from "./api.js";
import { renderBarsSvg } from "./bars.js";
import { distinctClassCount, paintBoundary } from "./boundary.js";
import { Applied, ProjectionFetcher } from "./fetcher.js";
import { classOrder, classStyle, renderScatterSvg } from "./scatter.js";
import { defaultState, snapLambda, stateFromQuery, stateToQuery, toggleClass,
         ViewState } from "./state.js";
import { lambdaAtClick, renderTraceSvg } from "./trace.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function toast(message: string): void {
  const box = el<HTMLDivElement>("toast");
  box.textContent = message;
  box.style.opacity = "1";
  setTimeout(() => {
    box.style.opacity = "0";
  }, 4000);
}

class Explorer {
  state: ViewState;
  api: Api;
  fetcher: ProjectionFetcher | null = null;
  payload: ProjectionPayload | null = null;
  lrLoaded = false;

  constructor() {
    const query = window.location.search;
    this.state = stateFromQuery(query);
    const apiBase = new URLSearchParams(query).get("api")
      ?? window.location.origin;
    this.api = new Api(apiBase);
  }

  async start(): Promise<void> {
    const slider = el<HTMLInputElement>("lambda");
    slider.value = String(this.state.lambda);
    el<HTMLSpanElement>("lambda-value").textContent =
      this.state.lambda.toFixed(2);
    slider.addEventListener("input", () => {
      this.setLambda(Number(slider.value));
    });
    el<HTMLButtonElement>("boundary-toggle").addEventListener("click", () => {
      this.state = { ...this.state, boundaryOn: !this.state.boundaryOn };
      this.syncUrl();
      void this.refreshBoundary();
    });
    el<HTMLButtonElement>("lr-show").addEventListener("click", () => {
      void this.showTrace();
    });
    el<HTMLFormElement>("upload-form").addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.upload();
    });
    if (this.state.sessionId) {
      await this.connect(this.state.sessionId);
    }
  }

  setLambda(value: number, immediate = false): void {
    const lam = snapLambda(value);
    this.state = { ...this.state, lambda: lam };
    el<HTMLInputElement>("lambda").value = String(lam);
    el<HTMLSpanElement>("lambda-value").textContent = lam.toFixed(2);
    this.syncUrl();
    if (this.fetcher) {
      if (immediate) {
        void this.fetcher.issue(lam);
      } else {
        this.fetcher.request(lam);
      }
    }
  }

  syncUrl(): void {
    const query = stateToQuery(this.state);
    window.history.replaceState(null, "", `?${query}`);
  }

  async connect(sessionId: string): Promise<void> {
    this.state = { ...this.state, sessionId };
    this.syncUrl();
    try {
      const info = await this.api.getSessionInfo(sessionId);
      el<HTMLSpanElement>("session-label").textContent =
        `${sessionId.slice(0, 8)} (${info.status}, n=${info.n ?? "?"}, ` +
        `p=${info.p ?? "?"}, d=${info.d ?? "?"})`;
      const single = (info.classes ?? []).length < 2;
      el<HTMLButtonElement>("boundary-toggle").style.display =
        single || (info.d ?? 0) < 2 ? "none" : "";
      el<HTMLButtonElement>("lr-show").style.display = single ? "none" : "";
    } catch (err) {
      toast(String(err));
      return;
    }
    this.fetcher = new ProjectionFetcher(
      this.api, sessionId,
      (applied) => this.apply(applied),
      (err) => toast(err instanceof ApiError
        ? `${err.category}: ${err.message}` : String(err)));
    await this.fetcher.issue(this.state.lambda);
    if (this.state.boundaryOn) {
      await this.refreshBoundary();
    }
  }

  apply(applied: Applied): void {
    this.payload = applied.payload;
    const hidden = new Set(this.state.hiddenClasses);
    el<HTMLDivElement>("scatter").innerHTML =
      renderScatterSvg(applied.payload, hidden);
    el<HTMLDivElement>("bars").innerHTML = renderBarsSvg(applied.payload);
    this.renderLegend();
    if (this.state.boundaryOn) {
      void this.refreshBoundary();
    }
  }

  renderLegend(): void {
    if (!this.payload) {
      return;
    }
    const classes = classOrder(this.payload);
    const style = classStyle(classes);
    const legend = el<HTMLDivElement>("legend");
    legend.innerHTML = "";
    for (const c of classes) {
      const item = document.createElement("button");
      const hidden = this.state.hiddenClasses.includes(c);
      item.textContent = c;
      item.style.borderColor = style.get(c)?.color ?? "#555";
      item.style.opacity = hidden ? "0.35" : "1";
      item.addEventListener("click", () => {
        this.state = toggleClass(this.state, c);
        this.syncUrl();
        if (this.payload) {
          this.apply({ lambda: this.state.lambda, payload: this.payload,
                       rawText: "" });
        }
      });
      legend.appendChild(item);
    }
  }

  async refreshBoundary(): Promise<void> {
    const canvas = el<HTMLCanvasElement>("boundary");
    const ctx = canvas.getContext("2d");
    if (!ctx) {
      return;
    }
    if (!this.state.boundaryOn || !this.fetcher) {
      ctx.clearRect(0, 0, canvas.width, canvas.height);
      return;
    }
    try {
      const payload = await this.api.getBoundary(this.state.sessionId,
                                                 this.state.lambda);
      if (distinctClassCount(payload) < 2) {
        ctx.clearRect(0, 0, canvas.width, canvas.height);
        return;
      }
      paintBoundary(ctx, payload, canvas.width, canvas.height);
    } catch (err) {
      toast(err instanceof ApiError
        ? `${err.category}: ${err.message}` : String(err));
    }
  }

  async showTrace(): Promise<void> {
    try {
      const trace = await this.api.getLrTrace(this.state.sessionId);
      const panel = el<HTMLDivElement>("trace");
      panel.innerHTML = renderTraceSvg(trace, this.state.lambda);
      panel.onclick = (ev) => {
        const rect = panel.getBoundingClientRect();
        const lam = lambdaAtClick(ev.clientX - rect.left, 320, trace);
        this.setLambda(lam, true);
        panel.innerHTML = renderTraceSvg(trace, lam);
      };
      this.lrLoaded = true;
    } catch (err) {
      toast(err instanceof ApiError
        ? `${err.category}: ${err.message}` : String(err));
    }
  }

  async upload(): Promise<void> {
    const input = el<HTMLInputElement>("csv-file");
    const file = input.files?.[0];
    if (!file) {
      toast("choose a CSV file first");
      return;
    }
    const config = {
      label_column: el<HTMLInputElement>("label-col").value || "class",
      family: el<HTMLSelectElement>("family").value,
    };
    try {
      const info = await this.api.createSession(file, file.name, config);
      await this.connect(info.session_id);
    } catch (err) {
      toast(err instanceof ApiError
        ? `${err.category}: ${err.message}` : String(err));
    }
  }
}

new Explorer().start().catch((err) => toast(String(err)));
