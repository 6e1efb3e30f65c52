// Eye/lip retargeting sliders.  Moves are debounced so a drag produces one
// params request, not a stream; reset returns both sliders to the engine's
// own default behavior (null on the wire).

export const SLIDER_DEBOUNCE_MS = 150;

export type ParamsSubmit = (eye: number | null, lip: number | null) => void;

export class RetargetSliders {
  eye: number | null = null;
  lip: number | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly submit: ParamsSubmit,
    private readonly delayMs: number = SLIDER_DEBOUNCE_MS,
  ) {}

  private clamp(value: number): number {
    return Math.min(Math.max(value, 0), 1);
  }

  setEye(value: number): void {
    this.eye = this.clamp(value);
    this.schedule();
  }

  setLip(value: number): void {
    this.lip = this.clamp(value);
    this.schedule();
  }

  reset(): void {
    this.eye = null;
    this.lip = null;
    this.schedule();
  }

  private schedule(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      this.submit(this.eye, this.lip);
    }, this.delayMs);
  }

  /** Fire a pending submission immediately (e.g. before commit). */
  flush(): void {
    if (this.timer === null) return;
    clearTimeout(this.timer);
    this.timer = null;
    this.submit(this.eye, this.lip);
  }
}
