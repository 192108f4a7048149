/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_estimator_free: (a: number, b: number) => void;
export const estimator_estimate: (a: number, b: number, c: number) => [number, number, number, number];
export const estimator_new: (a: number, b: bigint) => [number, number, number];
export const force_response: (a: number, b: number, c: number) => [number, number];
export const simulate: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
