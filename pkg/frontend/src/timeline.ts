// Timeline scrubbing over a progressively generated session.
//
// Scrubbing never blocks: an available frame is shown immediately, a
// pending frame shows a placeholder (snapping the display to the nearest
// available frame meanwhile) and triggers exactly one request_frames call.
// While the session is generating, status is polled every 500 ms.

import type { StudioApi } from './api';
import type { StatusOut } from './types';

export const POLL_INTERVAL_MS = 500;

export interface ScrubView {
  position: number;
  /** frame to draw right now; null when nothing is available yet */
  displayFrame: number | null;
  /** true when the scrubbed position itself is not available yet */
  pending: boolean;
}

export class TimelineModel {
  readonly available = new Set<number>();
  private readonly inFlight = new Set<number>();
  private pollHandle: ReturnType<typeof setInterval> | null = null;
  private lastStatus: StatusOut | null = null;
  position = 0;

  constructor(
    private readonly api: StudioApi,
    readonly sessionId: string,
    readonly frameCount: number,
  ) {}

  nearestAvailable(position: number): number | null {
    let best: number | null = null;
    let bestDistance = Infinity;
    for (const index of this.available) {
      const distance = Math.abs(index - position);
      if (distance < bestDistance) {
        best = index;
        bestDistance = distance;
      }
    }
    return best;
  }

  /** Move the playhead.  Returns what to display; requests generation of a
   * pending frame exactly once. */
  scrub(position: number): ScrubView {
    this.position = Math.min(Math.max(Math.round(position), 0), this.frameCount - 1);
    if (this.available.has(this.position)) {
      return { position: this.position, displayFrame: this.position, pending: false };
    }
    if (!this.inFlight.has(this.position)) {
      this.inFlight.add(this.position);
      void this.api.requestFrames(this.sessionId, [this.position]).catch(() => {
        this.inFlight.delete(this.position); // allow a retry on the next scrub
      });
    }
    return {
      position: this.position,
      displayFrame: this.nearestAvailable(this.position),
      pending: true,
    };
  }

  /** Fold a status response in; returns indices that just became available. */
  applyStatus(status: StatusOut): number[] {
    this.lastStatus = status;
    const fresh: number[] = [];
    for (const index of status.available_indices) {
      if (!this.available.has(index)) {
        this.available.add(index);
        fresh.push(index);
      }
      this.inFlight.delete(index);
    }
    return fresh;
  }

  get status(): StatusOut | null {
    return this.lastStatus;
  }

  get polling(): boolean {
    return this.pollHandle !== null;
  }

  /** Poll session status every 500 ms until generation settles. */
  startPolling(onUpdate?: (fresh: number[], status: StatusOut) => void): void {
    if (this.pollHandle !== null) return;
    this.pollHandle = setInterval(async () => {
      let status: StatusOut;
      try {
        status = await this.api.getStatus(this.sessionId);
      } catch {
        return; // transient; next tick retries
      }
      const fresh = this.applyStatus(status);
      if (onUpdate && (fresh.length > 0 || status.state !== 'generating')) {
        onUpdate(fresh, status);
      }
      if (status.state !== 'generating' && this.inFlight.size === 0) {
        this.stopPolling();
      }
    }, POLL_INTERVAL_MS);
  }

  stopPolling(): void {
    if (this.pollHandle !== null) {
      clearInterval(this.pollHandle);
      this.pollHandle = null;
    }
  }
}
