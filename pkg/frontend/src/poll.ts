// Polling controller for live run status: fixed interval, at most one
// request in flight, stops itself on terminal payloads.

export interface PollOptions<T> {
  intervalMs?: number;
  isTerminal: (value: T) => boolean;
  onUpdate: (value: T) => void;
  onError?: (error: unknown) => void;
  // injectable scheduler so tests can drive time
  schedule?: (fn: () => void, ms: number) => unknown;
  cancel?: (handle: unknown) => void;
}

export interface PollHandle {
  stop(): void;
  readonly stopped: boolean;
}

export const DEFAULT_POLL_INTERVAL_MS = 2000;

export function startPolling<T>(
  load: () => Promise<T>,
  options: PollOptions<T>,
): PollHandle {
  const intervalMs = options.intervalMs ?? DEFAULT_POLL_INTERVAL_MS;
  const schedule = options.schedule ?? ((fn, ms) => setTimeout(fn, ms));
  const cancel = options.cancel ?? ((handle) => clearTimeout(handle as number));

  let stopped = false;
  let inFlight = false;
  let timer: unknown = null;

  const tick = () => {
    if (stopped) return;
    if (inFlight) {
      // never stack requests; try again next interval
      timer = schedule(tick, intervalMs);
      return;
    }
    inFlight = true;
    load()
      .then((value) => {
        inFlight = false;
        if (stopped) return;
        options.onUpdate(value);
        if (options.isTerminal(value)) {
          stopped = true;
          return;
        }
        timer = schedule(tick, intervalMs);
      })
      .catch((error) => {
        inFlight = false;
        if (stopped) return;
        options.onError?.(error);
        timer = schedule(tick, intervalMs);
      });
  };

  tick(); // immediate first load
  return {
    stop() {
      stopped = true;
      if (timer !== null) cancel(timer);
    },
    get stopped() {
      return stopped;
    },
  };
}
