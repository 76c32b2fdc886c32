/* tslint:disable */
/* eslint-disable */

/**
 * Empirical χ(q) at lag `lag` from `n_summers` simulated summers, as a JSON
 * array of `[q, chi]` pairs (`chi` is `null` when undefined).
 */
export function chiCurve(params: Float64Array, seed: bigint, n_summers: number, lag: number): string;

/**
 * Conditional density of today's temperature on an even grid of `n` points
 * over `[lo, hi]`, given yesterday's temperature and both states. Returns
 * interleaved `[y0, f0, y1, f1, ...]`.
 */
export function conditionalDensity(params: Float64Array, y_prev: number, prev_heat_wave: boolean, heat_wave: boolean, lo: number, hi: number, n: number): Float64Array;

/**
 * A reasonable starting parameter vector for the sliders.
 */
export function defaultParameters(): Float64Array;

/**
 * Parameter names in the order the other functions expect them.
 */
export function parameterNames(): string[];

/**
 * Simulates one summer and runs the three heat-wave definitions on it.
 * Returns a JSON [`demo::SummerView`].
 */
export function simulateSummer(params: Float64Array, seed: bigint, n_days: number, t1: number, t2: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly chiCurve: (a: number, b: number, c: bigint, d: number, e: number) => [number, number, number, number];
    readonly conditionalDensity: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly defaultParameters: () => [number, number];
    readonly parameterNames: () => [number, number];
    readonly simulateSummer: (a: number, b: number, c: bigint, d: number, e: number, f: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_drop_slice: (a: number, b: number) => void;
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
