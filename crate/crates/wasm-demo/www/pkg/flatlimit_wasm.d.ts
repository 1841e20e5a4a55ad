/* tslint:disable */
/* eslint-disable */

/**
 * `n`-point Gauss rule of the functional.
 */
export function gauss_rule(functional: string, n: number): string;

/**
 * Jointly optimised `n`-point rule at one length scale.
 */
export function optimal_rule(functional: string, n: number, length_scale: number, restarts: number, seed: number): string;

/**
 * Optimal weights, wce and distances to the polynomial rule over a
 * log-spaced length-scale grid.
 */
export function weights_sweep(functional: string, nodes: Float64Array, l_min: number, l_max: number, count: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly gauss_rule: (a: number, b: number, c: number) => [number, number, number, number];
    readonly optimal_rule: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly weights_sweep: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
