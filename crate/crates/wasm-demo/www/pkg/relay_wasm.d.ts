/* tslint:disable */
/* eslint-disable */

/**
 * A world stepped by the page. The operator's choice is sticky, exactly as
 * in the live server; with autopilot on, the scripted expert chooses.
 */
export class DemoWorld {
    free(): void;
    [Symbol.dispose](): void;
    finished(): boolean;
    /**
     * `{"kind":"hello",...}` describing ring size and UE count.
     */
    hello(): string;
    /**
     * `config` is a JSON object of overrides, e.g. `{"seed": 4}`; pass "" for defaults.
     */
    constructor(config: string, run: number);
    select(ue: number): void;
    set_autopilot(on: boolean): void;
    /**
     * Current state as a `{"kind":"state",...}` message.
     */
    snapshot(): string;
    /**
     * Runs up to `n` events; returns the last state message, or the current
     * one when the world has finished.
     */
    step(n: number): string;
}

/**
 * Per-frame metrics of one expert run: `frames` frames under `config`
 * overrides and hysteresis `delta`.
 */
export function frame_sweep(config: string, frames: number, delta: number): string;

/**
 * How the UAV gets from sector `uav` to sector `target` on a ring of
 * `sectors`, and how much that distance stretches service time.
 */
export function ring_path(sectors: number, uav: number, target: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demoworld_free: (a: number, b: number) => void;
    readonly demoworld_finished: (a: number) => number;
    readonly demoworld_hello: (a: number) => [number, number];
    readonly demoworld_new: (a: number, b: number, c: number) => [number, number, number];
    readonly demoworld_select: (a: number, b: number) => [number, number];
    readonly demoworld_set_autopilot: (a: number, b: number) => void;
    readonly demoworld_snapshot: (a: number) => [number, number];
    readonly demoworld_step: (a: number, b: number) => [number, number, number, number];
    readonly frame_sweep: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly ring_path: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
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
