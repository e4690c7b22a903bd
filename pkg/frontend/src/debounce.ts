// Trailing-edge debouncer: rapid calls collapse into one invocation with
// the latest argument after the quiet period.

export interface Debounced<T> {
  (value: T): void;
  cancel(): void;
  flush(): void;
}

export function debounce<T>(fn: (value: T) => void,
                            delayMs: number): Debounced<T> {
  let timer: ReturnType<typeof setTimeout> | null = null;
  let pending: { value: T } | null = null;

  const out = ((value: T) => {
    pending = { value };
    if (timer !== null) {
      clearTimeout(timer);
    }
    timer = setTimeout(() => {
      timer = null;
      const arg = pending;
      pending = null;
      if (arg) {
        fn(arg.value);
      }
    }, delayMs);
  }) as Debounced<T>;

  out.cancel = () => {
    if (timer !== null) {
      clearTimeout(timer);
      timer = null;
    }
    pending = null;
  };

  out.flush = () => {
    if (timer !== null) {
      clearTimeout(timer);
      timer = null;
      const arg = pending;
      pending = null;
      if (arg) {
        fn(arg.value);
      }
    }
  };

  return out;
}
