// Wire contract types for the studio service.
// The UI performs no image math: every pixel it shows and every box it
// draws comes straight out of these response shapes.

export interface PanelInfo {
  panel_id: string;
  width: number;
  height: number;
  channels: number;
}

export interface SquareBox {
  x: number;
  y: number;
  side: number;
}

export interface RectHull {
  x: number;
  y: number;
  width: number;
  height: number;
}

export type RegionOrigin = 'auto' | 'manual';

export interface RegionOut {
  panel_id: string;
  face_index: number;
  origin: RegionOrigin;
  warnings: string[];
  square: SquareBox;
  scale: number;
}

export interface FailureOut {
  input_index: number;
  code: string;
  message: string;
  hull: RectHull | null;
}

export interface DetectOut {
  regions: RegionOut[];
  failures: FailureOut[];
}

export interface EngineInfo {
  name: string;
  deterministic: boolean;
  max_concurrency: number;
}

export interface EnginesOut {
  engines: EngineInfo[];
  diagnostics: string[];
}

export interface SessionCreated {
  session_id: string;
  frame_count: number;
}

export type SessionState = 'created' | 'generating' | 'browsable' | 'committed';
export type MotionMode = 'relative' | 'absolute';

export interface StatusOut {
  session_id: string;
  state: SessionState;
  frame_count: number;
  available_indices: number[];
  selected_index: number | null;
  mode: MotionMode;
  eye: number | null;
  lip: number | null;
  frame_errors: Record<string, string>;
}

export interface ProvenanceOut {
  engine: string;
  frame_index: number;
  mode: MotionMode;
  eye: number | null;
  lip: number | null;
}

export interface MappedOut {
  mapped_id: string;
  panel_id: string;
  square: SquareBox;
  provenance: ProvenanceOut;
}

export interface SeamOut {
  square: SquareBox;
  margin: number;
  band_pixel_count: number;
  inner_mean_abs: number[];
  outer_mean_abs: number[];
  band_mean_abs: number[];
  band_max_abs: number;
}

export interface ComposeOut {
  composed_id: string;
  panel_id: string;
  feather_width: number;
  warnings: string[];
  seams: SeamOut[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
  retryable: boolean;
}
