/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const field_grid: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const gradient_marginal: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const phase_scan: (a: number, b: number, c: number, d: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
