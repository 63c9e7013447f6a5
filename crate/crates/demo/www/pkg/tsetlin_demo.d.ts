/* tslint:disable */
/* eslint-disable */

/**
 * Single automaton in a two-armed Bernoulli environment: each step the
 * chosen action is rewarded with its probability, penalized otherwise.
 * Returns the state after every step.
 */
export function automaton_walk(states_per_action: number, p_include: number, p_exclude: number, steps: number, seed: bigint): string;

/**
 * Fit thresholds on a comma or whitespace separated list of values and
 * encode each value, plus an optional probe value.
 */
export function encode_thresholds(values: string, probe?: number | null): string;

/**
 * Train the two-integer task (class 1 iff `x1 + x2 == 9`) with 4 clauses,
 * returning the per-epoch automaton states, the learned rules and the
 * predicted class of every input cell.
 */
export function train_artificial(seed: bigint, samples: number, epochs: number, positive_fraction: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly automaton_walk: (a: number, b: number, c: number, d: number, e: bigint) => [number, number];
    readonly encode_thresholds: (a: number, b: number, c: number, d: number) => [number, number];
    readonly train_artificial: (a: bigint, b: number, c: number, d: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
