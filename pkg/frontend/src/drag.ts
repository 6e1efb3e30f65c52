// Square frame drawing.  The constraint is enforced DURING the drag so the
// artist sees exactly the square that will be submitted; the preview clamp
// is a convenience only, the server re-validates every submission.

import type { ManualRect } from './api';
import type { SquareBox } from './types';

export interface PanelSize {
  width: number;
  height: number;
}

export class SquareDragController {
  private startX = 0;
  private startY = 0;
  private curX = 0;
  private curY = 0;
  private dragging = false;

  constructor(private readonly panel: PanelSize) {}

  get active(): boolean {
    return this.dragging;
  }

  begin(x: number, y: number): void {
    this.startX = x;
    this.startY = y;
    this.curX = x;
    this.curY = y;
    this.dragging = true;
  }

  move(x: number, y: number): void {
    if (!this.dragging) return;
    this.curX = x;
    this.curY = y;
  }

  /** The square under the pointer right now: side = max of the drag
   * extents, anchored at the drag origin, clamped into the panel. */
  preview(): SquareBox | null {
    if (!this.dragging) return null;
    const dx = this.curX - this.startX;
    const dy = this.curY - this.startY;
    let side = Math.round(Math.max(Math.abs(dx), Math.abs(dy)));
    side = Math.min(side, this.panel.width, this.panel.height);
    let x = dx >= 0 ? this.startX : this.startX - side;
    let y = dy >= 0 ? this.startY : this.startY - side;
    x = Math.min(Math.max(Math.round(x), 0), this.panel.width - side);
    y = Math.min(Math.max(Math.round(y), 0), this.panel.height - side);
    return { x, y, side };
  }

  /** Ends the drag and returns the rect to submit as a manual region, or
   * null when there was no drag worth submitting. */
  finish(): ManualRect | null {
    const box = this.preview();
    this.dragging = false;
    if (box === null || box.side === 0) return null;
    return { x: box.x, y: box.y, width: box.side, height: box.side };
  }

  cancel(): void {
    this.dragging = false;
  }
}
