/* tslint:disable */
/* eslint-disable */

/**
 * A single-contact pipeline trained in the page on a reduced protocol.
 */
export class Estimator {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * JSON object with stretch, contact_detected, node [x, y] and force.
     */
    estimate(features: Float64Array): string;
    constructor(reps: number, seed: bigint);
}

/**
 * Channel increment against force, `steps` samples from 0 to `max_force`,
 * at terminal distance `distance` from the contact.
 */
export function force_response(distance: number, max_force: number, steps: number): Float64Array;

/**
 * Twenty channel values, cx1..cx10 then cy1..cy10. `nodes` holds (x, y)
 * pairs, one per contact, and `forces` the matching newtons.
 */
export function simulate(lambda: number, nodes: Uint8Array, forces: Float64Array, noise: boolean, seed: bigint): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_estimator_free: (a: number, b: number) => void;
    readonly estimator_estimate: (a: number, b: number, c: number) => [number, number, number, number];
    readonly estimator_new: (a: number, b: bigint) => [number, number, number];
    readonly force_response: (a: number, b: number, c: number) => [number, number];
    readonly simulate: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
