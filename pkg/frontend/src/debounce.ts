/**
 * Debounced, superseding executor: rapid triggers collapse into one run
 * after the window closes, and a trigger arriving while a run is in flight
 * queues exactly one follow-up run (latest wins).
 */

export class DebouncedRunner {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inFlight = false;
  private queued = false;
  runCount = 0;

  constructor(
    private readonly action: () => Promise<void>,
    private readonly windowMs: number,
  ) {}

  /** Schedule a run once the debounce window closes. */
  trigger(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.runNow();
    }, this.windowMs);
  }

  /** Run immediately (structural edits bypass the window). */
  async runNow(): Promise<void> {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    if (this.inFlight) {
      this.queued = true;
      return;
    }
    this.inFlight = true;
    try {
      do {
        this.queued = false;
        this.runCount += 1;
        await this.action();
      } while (this.queued);
    } finally {
      this.inFlight = false;
    }
  }

  /** True when a run is scheduled or executing. */
  get busy(): boolean {
    return this.timer !== null || this.inFlight;
  }

  cancel(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.queued = false;
  }
}
