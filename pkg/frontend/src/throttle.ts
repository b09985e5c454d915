/** Request throttling for continuous partner drags.
 *
 * Guarantees at most `maxPerSecond` dispatches: the first call in a quiet
 * period fires immediately, later calls inside the window are coalesced into
 * one trailing dispatch carrying the latest arguments (latest wins).  A key
 * function deduplicates identical in-flight requests, and responses that
 * arrive after a newer dispatch are dropped so stale grids never overwrite
 * fresh ones.
 */

export interface ThrottleOptions<A, R> {
  maxPerSecond: number;
  send: (arg: A) => Promise<R>;
  onResult: (arg: A, result: R) => void;
  onError?: (arg: A, error: unknown) => void;
  keyOf?: (arg: A) => string;
  now?: () => number;
  schedule?: (fn: () => void, ms: number) => unknown;
}

export function createThrottledSender<A, R>(options: ThrottleOptions<A, R>) {
  const now = options.now ?? (() => Date.now());
  const schedule = options.schedule ?? ((fn, ms) => setTimeout(fn, ms));
  const keyOf = options.keyOf ?? ((arg: A) => JSON.stringify(arg));
  const interval = 1000 / options.maxPerSecond;

  let lastDispatch = -Infinity;
  let pending: A | null = null;
  let timerArmed = false;
  let dispatchCounter = 0;
  let inFlightKey: string | null = null;
  let sent = 0;

  function dispatch(arg: A) {
    const key = keyOf(arg);
    if (key === inFlightKey) return; // identical request already in flight
    lastDispatch = now();
    sent += 1;
    dispatchCounter += 1;
    const ticket = dispatchCounter;
    inFlightKey = key;
    options
      .send(arg)
      .then((result) => {
        if (ticket === dispatchCounter) options.onResult(arg, result);
      })
      .catch((error) => {
        if (ticket === dispatchCounter) options.onError?.(arg, error);
      })
      .finally(() => {
        if (inFlightKey === key) inFlightKey = null;
      });
  }

  function flushPending() {
    timerArmed = false;
    if (pending === null) return;
    const arg = pending;
    pending = null;
    dispatch(arg);
  }

  return {
    request(arg: A) {
      const elapsed = now() - lastDispatch;
      if (elapsed >= interval && !timerArmed) {
        dispatch(arg);
        return;
      }
      pending = arg; // latest wins
      if (!timerArmed) {
        timerArmed = true;
        schedule(flushPending, Math.max(interval - elapsed, 0));
      }
    },
    get sentCount() {
      return sent;
    },
  };
}
