/* tslint:disable */
/* eslint-disable */

/**
 * `F[chord_f(z), g(z)]` sampled on `[m, M]` with its optimized extremum.
 */
export function converse_curve(f_spec: string, g_spec: string, big_f: string, m: number, big_m: number, samples: number): string;

/**
 * Jensen gap for `trials` random unital fields of the given dimension.
 * Reports each smallest eigenvalue of `int phi(f(x)) - f(int phi(x))`.
 */
export function jensen_trials(f_spec: string, m: number, big_m: number, dim: number, trials: number, seed: number): string;

/**
 * `H(z)` sampled on `[m, M]`, with the closed-form constant and branch.
 */
export function power_curve(lambda: number, m: number, big_m: number, p: number, q: number, samples: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly converse_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number];
    readonly jensen_trials: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
    readonly power_curve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
