// Typing telemetry for one composed message. Timestamps are milliseconds
// (performance.now() in the browser, explicit values in tests).

const DELETION_KEYS = new Set(["Backspace", "Delete"]);

export interface TelemetrySummary {
  typing_time_per_char: number; // seconds per character of the final text
  deletions: number;
}

export class TelemetryAccumulator {
  private firstKeystrokeMs: number | null = null;
  private lastKeystrokeMs: number | null = null;
  private deletionCount = 0;

  keystroke(key: string, timestampMs: number): void {
    if (this.firstKeystrokeMs === null) this.firstKeystrokeMs = timestampMs;
    this.lastKeystrokeMs = timestampMs;
    if (DELETION_KEYS.has(key)) this.deletionCount += 1;
  }

  get hasInput(): boolean {
    return this.firstKeystrokeMs !== null;
  }

  get deletions(): number {
    return this.deletionCount;
  }

  summarize(characterCount: number): TelemetrySummary {
    const spanMs =
      this.firstKeystrokeMs === null || this.lastKeystrokeMs === null
        ? 0
        : this.lastKeystrokeMs - this.firstKeystrokeMs;
    const chars = Math.max(1, characterCount);
    return {
      typing_time_per_char: spanMs / 1000 / chars,
      deletions: this.deletionCount,
    };
  }

  reset(): void {
    this.firstKeystrokeMs = null;
    this.lastKeystrokeMs = null;
    this.deletionCount = 0;
  }
}
