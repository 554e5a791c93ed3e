// Poll loop with disconnect detection. Timers are injectable so tests can
// drive ticks synthetically.

export interface PollCallbacks {
  onTick: () => Promise<void>;
  onDisconnect: (failures: number) => void;
  onReconnect: () => void;
}

type Scheduler = (fn: () => void, ms: number) => unknown;
type Canceler = (handle: unknown) => void;

export class PollLoop {
  private handle: unknown = null;
  private failures = 0;
  private running = false;

  constructor(
    private readonly intervalMs: number,
    private readonly callbacks: PollCallbacks,
    private readonly schedule: Scheduler = (fn, ms) => setTimeout(fn, ms),
    private readonly cancel: Canceler = (h) => clearTimeout(h as number),
  ) {}

  start(): void {
    if (this.running) {
      return;
    }
    this.running = true;
    void this.tick();
  }

  stop(): void {
    this.running = false;
    if (this.handle !== null) {
      this.cancel(this.handle);
      this.handle = null;
    }
  }

  get consecutiveFailures(): number {
    return this.failures;
  }

  private async tick(): Promise<void> {
    if (!this.running) {
      return;
    }
    try {
      await this.callbacks.onTick();
      if (this.failures > 0) {
        this.failures = 0;
        this.callbacks.onReconnect();
      }
    } catch {
      this.failures += 1;
      this.callbacks.onDisconnect(this.failures);
    }
    if (this.running) {
      this.handle = this.schedule(() => void this.tick(), this.intervalMs);
    }
  }
}
