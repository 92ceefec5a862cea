/* tslint:disable */
/* eslint-disable */

export class Series {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    markers(): Float64Array;
    traceCount(): number;
    x(): Float64Array;
    y(i: number): Float64Array;
}

export function angleSweep(transmission: boolean, freq_hz: number, power_scale: number): Series;

export function orientationComparison(angle_deg: number, power_scale: number): Series;

export function springVsDetuning(transmission: boolean, power_scale: number, loss_ppm: number): Series;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_series_free: (a: number, b: number) => void;
    readonly angleSweep: (a: number, b: number, c: number) => [number, number, number];
    readonly orientationComparison: (a: number, b: number) => [number, number, number];
    readonly series_markers: (a: number) => [number, number];
    readonly series_traceCount: (a: number) => number;
    readonly series_x: (a: number) => [number, number];
    readonly series_y: (a: number, b: number) => [number, number];
    readonly springVsDetuning: (a: number, b: number, c: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
