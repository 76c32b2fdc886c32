/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const chiCurve: (a: number, b: number, c: bigint, d: number, e: number) => [number, number, number, number];
export const conditionalDensity: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
export const defaultParameters: () => [number, number];
export const parameterNames: () => [number, number];
export const simulateSummer: (a: number, b: number, c: bigint, d: number, e: number, f: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_start: () => void;
