/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_series_free: (a: number, b: number) => void;
export const angleSweep: (a: number, b: number, c: number) => [number, number, number];
export const orientationComparison: (a: number, b: number) => [number, number, number];
export const series_markers: (a: number) => [number, number];
export const series_traceCount: (a: number) => number;
export const series_x: (a: number) => [number, number];
export const series_y: (a: number, b: number) => [number, number];
export const springVsDetuning: (a: number, b: number, c: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
