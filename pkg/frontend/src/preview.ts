// Composition preview: before/after comparison of the source panel and the
// composed draft, plus export.  Disabled until at least one face has been
// committed; every shown pixel is a service asset.

import type { StudioApi } from './api';
import type { ComposeOut } from './types';

export class ComposePreview {
  private readonly committed: string[] = [];
  private composed: ComposeOut | null = null;
  showComposed = false;

  constructor(
    private readonly api: StudioApi,
    private readonly panelId: string,
  ) {}

  addCommitted(mappedId: string): void {
    this.committed.push(mappedId);
  }

  get committedIds(): readonly string[] {
    return this.committed;
  }

  get enabled(): boolean {
    return this.committed.length > 0;
  }

  get composedId(): string | null {
    return this.composed?.composed_id ?? null;
  }

  get warnings(): string[] {
    return this.composed?.warnings ?? [];
  }

  async composeNow(featherWidth = 0): Promise<ComposeOut> {
    this.composed = await this.api.compose(this.panelId, this.committed, featherWidth);
    return this.composed;
  }

  /** Flip between source and composed; refuses when there is nothing to show. */
  toggle(): boolean {
    if (!this.enabled || this.composed === null) {
      this.showComposed = false;
      return false;
    }
    this.showComposed = !this.showComposed;
    return true;
  }

  /** id of the image to display for the current toggle state */
  displayedItemId(): string {
    if (this.showComposed && this.composed !== null) {
      return this.composed.composed_id;
    }
    return this.panelId;
  }

  /** PNG bytes of the composed draft, byte-identical to the service asset. */
  exportBytes(): Promise<Uint8Array> {
    if (this.composed === null) {
      return Promise.reject(new Error('nothing composed yet'));
    }
    return this.api.exportItem(this.composed.composed_id);
  }
}
