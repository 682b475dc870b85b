/* tslint:disable */
/* eslint-disable */
export function planPlate(pattern: string, angle_deg: number, sf: number, cp: number, hf: number, spacing: number, farthest: boolean): Plot;
export function plateGeodesic(pattern: string, x: number, y: number): Plot;
export function plateOffsets(pattern: string, spacing: number): Plot;
export class Plot {
  private constructor();
  free(): void;
  [Symbol.dispose](): void;
  cuts(): Float64Array;
  paths(): Float64Array;
  /**
   * Per-vertex scalar in [0, 1].
   */
  values(): Float64Array;
  summary(): string;
  /**
   * `x, y` per vertex.
   */
  vertices(): Float64Array;
  triangles(): Uint32Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
  readonly memory: WebAssembly.Memory;
  readonly __wbg_plot_free: (a: number, b: number) => void;
  readonly planPlate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
  readonly plateGeodesic: (a: number, b: number, c: number, d: number) => [number, number, number];
  readonly plateOffsets: (a: number, b: number, c: number) => [number, number, number];
  readonly plot_cuts: (a: number) => [number, number];
  readonly plot_paths: (a: number) => [number, number];
  readonly plot_summary: (a: number) => [number, number];
  readonly plot_triangles: (a: number) => [number, number];
  readonly plot_values: (a: number) => [number, number];
  readonly plot_vertices: (a: number) => [number, number];
  readonly __wbindgen_export_0: WebAssembly.Table;
  readonly __wbindgen_malloc: (a: number, b: number) => number;
  readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
  readonly __externref_table_dealloc: (a: number) => void;
  readonly __wbindgen_free: (a: number, b: number, c: number) => void;
  readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;
/**
* Instantiates the given `module`, which can either be bytes or
* a precompiled `WebAssembly.Module`.
*
* @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
*
* @returns {InitOutput}
*/
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
* If `module_or_path` is {RequestInfo} or {URL}, makes a request and
* for everything else, calls `WebAssembly.instantiate` directly.
*
* @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
*
* @returns {Promise<InitOutput>}
*/
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
