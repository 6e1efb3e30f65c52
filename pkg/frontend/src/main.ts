// DOM bootstrap for the studio.  All behavior lives in the small models
// (drag, timeline, sliders, preview); this file only wires them to elements.

import { ServiceError, StudioApi } from './api';
import { SquareDragController } from './drag';
import { OverlayBox, overlaysFromDetect, regionOverlay } from './overlay';
import { ComposePreview } from './preview';
import { RetargetSliders } from './sliders';
import { TimelineModel } from './timeline';
import type { PanelInfo, RegionOut } from './types';

const params = new URLSearchParams(window.location.search);
const api = new StudioApi(params.get('service') ?? '');

const el = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
};

const statusLine = el<HTMLDivElement>('status-line');
const canvas = el<HTMLCanvasElement>('panel-canvas');
const ctx = canvas.getContext('2d')!;
const regionList = el<HTMLUListElement>('region-list');
const frameImage = el<HTMLImageElement>('frame-image');
const timelineRange = el<HTMLInputElement>('timeline');
const timelineLabel = el<HTMLSpanElement>('timeline-label');

let panel: PanelInfo | null = null;
let overlays: OverlayBox[] = [];
let regions: RegionOut[] = [];
let activeRegion: RegionOut | null = null;
let timeline: TimelineModel | null = null;
let preview: ComposePreview | null = null;
let drag: SquareDragController | null = null;

function say(message: string): void {
  statusLine.textContent = message;
}

function fail(error: unknown): void {
  if (error instanceof ServiceError) {
    say(`${error.code}: ${error.message}`);
  } else {
    say(String(error));
  }
}

function redraw(): void {
  if (!panel) return;
  const image = new Image();
  image.onload = () => {
    canvas.width = panel!.width;
    canvas.height = panel!.height;
    ctx.drawImage(image, 0, 0);
    for (const box of overlays) {
      ctx.strokeStyle = box.color;
      ctx.lineWidth = 2;
      ctx.strokeRect(box.x, box.y, box.width, box.height);
      ctx.fillStyle = box.color;
      ctx.font = '12px sans-serif';
      ctx.fillText(box.label, box.x + 3, box.y + 13);
    }
    const pending = drag?.preview();
    if (pending) {
      ctx.strokeStyle = 'orange';
      ctx.setLineDash([6, 3]);
      ctx.strokeRect(pending.x, pending.y, pending.side, pending.side);
      ctx.setLineDash([]);
    }
  };
  const shown = preview?.showComposed ? preview.displayedItemId() : panel.panel_id;
  image.src = preview?.showComposed ? api.exportUrl(shown) : api.panelImageUrl(panel.panel_id);
}

function renderRegions(): void {
  regionList.replaceChildren(
    ...regions.map((region) => {
      const item = document.createElement('li');
      const warnings = region.warnings.length ? ` [${region.warnings.join(', ')}]` : '';
      item.textContent = `face ${region.face_index}: ${region.square.side}px ${region.origin}${warnings}`;
      item.classList.toggle('active', region === activeRegion);
      item.onclick = () => {
        activeRegion = region;
        renderRegions();
      };
      return item;
    }),
  );
}

el<HTMLInputElement>('panel-file').onchange = async (event) => {
  const input = event.target as HTMLInputElement;
  const file = input.files?.[0];
  if (!file) return;
  try {
    panel = await api.createPanel(new Uint8Array(await file.arrayBuffer()));
    overlays = [];
    regions = [];
    preview = new ComposePreview(api, panel.panel_id);
    drag = new SquareDragController(panel);
    say(`panel ${panel.panel_id}: ${panel.width}x${panel.height}`);
    redraw();
  } catch (error) {
    fail(error);
  }
};

el<HTMLButtonElement>('detect-button').onclick = async () => {
  if (!panel) return say('load a panel first');
  try {
    const detector = el<HTMLInputElement>('detector-name').value || 'mock';
    const doc = await api.detect(panel.panel_id, detector);
    overlays = overlaysFromDetect(doc);
    regions = doc.regions;
    activeRegion = regions[0] ?? null;
    renderRegions();
    redraw();
    say(`${doc.regions.length} region(s), ${doc.failures.length} failure(s)`);
  } catch (error) {
    fail(error);
  }
};

canvas.onpointerdown = (event) => {
  if (!drag) return;
  const rect = canvas.getBoundingClientRect();
  drag.begin(event.clientX - rect.left, event.clientY - rect.top);
};
canvas.onpointermove = (event) => {
  if (!drag?.active) return;
  const rect = canvas.getBoundingClientRect();
  drag.move(event.clientX - rect.left, event.clientY - rect.top);
  redraw();
};
canvas.onpointerup = async () => {
  if (!panel || !drag) return;
  const rect = drag.finish();
  redraw();
  if (!rect) return;
  try {
    const region = await api.manualRegion(panel.panel_id, rect);
    regions.push(region);
    overlays.push(regionOverlay(region));
    activeRegion = region;
    renderRegions();
    redraw();
  } catch (error) {
    fail(error); // e.g. SideTooSmall, surfaced inline
  }
};

el<HTMLButtonElement>('session-button').onclick = async () => {
  if (!panel || !activeRegion) return say('pick a region first');
  try {
    const created = await api.createSession({
      panel_id: panel.panel_id,
      face_index: activeRegion.face_index,
      engine: el<HTMLInputElement>('engine-name').value || 'identity',
      mode: el<HTMLSelectElement>('motion-mode').value,
      frames_dir: el<HTMLInputElement>('frames-dir').value,
    });
    timeline = new TimelineModel(api, created.session_id, created.frame_count);
    timelineRange.max = String(created.frame_count - 1);
    timelineRange.value = '0';
    say(`session ${created.session_id}: ${created.frame_count} frames`);
    showPosition(0);
  } catch (error) {
    fail(error);
  }
};

function showPosition(position: number): void {
  if (!timeline) return;
  const view = timeline.scrub(position);
  timelineLabel.textContent = view.pending
    ? `frame ${view.position} (generating)`
    : `frame ${view.position}`;
  if (view.displayFrame !== null) {
    frameImage.src = timeline
      ? new StudioApi(params.get('service') ?? '').frameUrl(timeline.sessionId, view.displayFrame)
      : '';
  }
  if (view.pending) {
    timeline.startPolling(() => showPosition(timeline!.position));
  }
}

timelineRange.oninput = () => showPosition(Number(timelineRange.value));

const sliders = new RetargetSliders(async (eye, lip) => {
  if (!timeline) return;
  try {
    await api.setParams(timeline.sessionId, eye, lip);
    showPosition(timeline.position);
  } catch (error) {
    fail(error);
  }
});
el<HTMLInputElement>('eye-slider').oninput = (event) =>
  sliders.setEye(Number((event.target as HTMLInputElement).value));
el<HTMLInputElement>('lip-slider').oninput = (event) =>
  sliders.setLip(Number((event.target as HTMLInputElement).value));
el<HTMLButtonElement>('slider-reset').onclick = () => sliders.reset();

el<HTMLButtonElement>('select-button').onclick = async () => {
  if (!timeline) return;
  try {
    await api.selectKeyframe(timeline.sessionId, timeline.position);
    say(`selected frame ${timeline.position}`);
  } catch (error) {
    fail(error);
  }
};

el<HTMLButtonElement>('commit-button').onclick = async () => {
  if (!timeline || !preview) return;
  try {
    sliders.flush();
    const mapped = await api.commit(timeline.sessionId);
    preview.addCommitted(mapped.mapped_id);
    say(`committed ${mapped.mapped_id} (frame ${mapped.provenance.frame_index})`);
  } catch (error) {
    fail(error);
  }
};

el<HTMLButtonElement>('compose-button').onclick = async () => {
  if (!preview) return;
  if (!preview.enabled) return say('commit a face first');
  try {
    const result = await preview.composeNow(Number(el<HTMLInputElement>('feather').value) || 0);
    say(
      result.warnings.length
        ? `composed ${result.composed_id}; ${result.warnings.join('; ')}`
        : `composed ${result.composed_id}`,
    );
  } catch (error) {
    fail(error);
  }
};

el<HTMLButtonElement>('toggle-button').onclick = () => {
  if (!preview) return;
  if (!preview.toggle()) return say('nothing composed yet');
  redraw();
};

el<HTMLButtonElement>('export-button').onclick = async () => {
  if (!preview) return;
  try {
    const bytes = await preview.exportBytes();
    const blob = new Blob([new Uint8Array(bytes)], { type: 'image/png' });
    const anchor = document.createElement('a');
    anchor.href = URL.createObjectURL(blob);
    anchor.download = 'composed.png';
    anchor.click();
    URL.revokeObjectURL(anchor.href);
  } catch (error) {
    fail(error);
  }
};
