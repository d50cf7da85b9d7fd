/* tslint:disable */
/* eslint-disable */

/**
 * Uniform-field grid for k = 2: counts per (tau, h) cell and the region boundaries.
 */
export function field_grid(tau_min: number, tau_max: number, h_min: number, h_max: number, steps: number): string;

/**
 * All laws at (k, tau) and the root-edge gradient distribution of the chosen one.
 */
export function gradient_marginal(k: number, tau: number, index: number, m: number, pin: number): string;

/**
 * Solution counts along a tau sweep, with refined transitions.
 */
export function phase_scan(k: number, tau_min: number, tau_max: number, steps: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly field_grid: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly gradient_marginal: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly phase_scan: (a: number, b: number, c: number, d: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
