/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_plot_free: (a: number, b: number) => void;
export const planPlate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
export const plateGeodesic: (a: number, b: number, c: number, d: number) => [number, number, number];
export const plateOffsets: (a: number, b: number, c: number) => [number, number, number];
export const plot_cuts: (a: number) => [number, number];
export const plot_paths: (a: number) => [number, number];
export const plot_summary: (a: number) => [number, number];
export const plot_triangles: (a: number) => [number, number];
export const plot_values: (a: number) => [number, number];
export const plot_vertices: (a: number) => [number, number];
export const __wbindgen_export_0: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
