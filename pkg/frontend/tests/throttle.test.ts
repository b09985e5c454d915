import { describe, expect, it } from "vitest";

import { createThrottledSender } from "../src/throttle.js";

interface FakeClock {
  now: () => number;
  schedule: (fn: () => void, ms: number) => void;
  advance: (ms: number) => void;
}

function fakeClock(): FakeClock {
  let t = 0;
  const timers: { at: number; fn: () => void }[] = [];
  return {
    now: () => t,
    schedule: (fn, ms) => {
      timers.push({ at: t + ms, fn });
    },
    advance: (ms) => {
      const end = t + ms;
      while (true) {
        timers.sort((a, b) => a.at - b.at);
        const next = timers[0];
        if (!next || next.at > end) break;
        timers.shift();
        t = next.at;
        next.fn();
      }
      t = end;
    },
  };
}

function makeSender(clock: FakeClock, log: string[], results: string[]) {
  return createThrottledSender<{ phi: number }, string>({
    maxPerSecond: 10,
    send: (arg) => {
      log.push(`send ${arg.phi}`);
      return Promise.resolve(`grid-for-${arg.phi}`);
    },
    onResult: (_arg, result) => results.push(result),
    now: clock.now,
    schedule: clock.schedule,
  });
}

describe("throttled field sender", () => {
  it("dispatches at most 10 requests per second under continuous drag", () => {
    const clock = fakeClock();
    const log: string[] = [];
    const sender = makeSender(clock, log, []);
    // 100 drag events over one second (one every 10 ms)
    for (let i = 0; i < 100; i++) {
      sender.request({ phi: i });
      clock.advance(10);
    }
    expect(sender.sentCount).toBeLessThanOrEqual(10 + 1); // trailing edge may add one
    expect(sender.sentCount).toBeGreaterThanOrEqual(9);
  });

  it("keeps only the latest drag position (latest wins)", () => {
    const clock = fakeClock();
    const log: string[] = [];
    const sender = makeSender(clock, log, []);
    sender.request({ phi: 0 }); // fires immediately
    sender.request({ phi: 1 }); // coalesced
    sender.request({ phi: 2 }); // replaces 1
    sender.request({ phi: 3 }); // replaces 2
    clock.advance(200);
    expect(log).toEqual(["send 0", "send 3"]);
  });

  it("drops stale responses after a newer dispatch", async () => {
    const clock = fakeClock();
    const results: string[] = [];
    let release: (v: string) => void = () => undefined;
    const sender = createThrottledSender<{ key: string }, string>({
      maxPerSecond: 10,
      send: (arg) =>
        arg.key === "slow"
          ? new Promise<string>((resolve) => {
              release = resolve;
            })
          : Promise.resolve("fast-grid"),
      onResult: (_arg, result) => results.push(result),
      now: clock.now,
      schedule: clock.schedule,
    });
    sender.request({ key: "slow" });
    clock.advance(150);
    sender.request({ key: "fast" });
    await Promise.resolve();
    release("slow-grid"); // arrives after the newer dispatch
    await Promise.resolve();
    await Promise.resolve();
    expect(results).toEqual(["fast-grid"]);
  });

  it("deduplicates identical in-flight requests", () => {
    const clock = fakeClock();
    const log: string[] = [];
    let resolveFirst: (v: string) => void = () => undefined;
    const sender = createThrottledSender<{ phi: number }, string>({
      maxPerSecond: 10,
      send: (arg) => {
        log.push(`send ${arg.phi}`);
        return new Promise<string>((resolve) => {
          resolveFirst = resolve;
        });
      },
      onResult: () => undefined,
      now: clock.now,
      schedule: clock.schedule,
    });
    sender.request({ phi: 7 });
    clock.advance(150);
    sender.request({ phi: 7 }); // same key, still in flight
    clock.advance(150);
    expect(log).toEqual(["send 7"]);
    resolveFirst("done");
  });
});
