/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demoworld_free: (a: number, b: number) => void;
export const demoworld_finished: (a: number) => number;
export const demoworld_hello: (a: number) => [number, number];
export const demoworld_new: (a: number, b: number, c: number) => [number, number, number];
export const demoworld_select: (a: number, b: number) => [number, number];
export const demoworld_set_autopilot: (a: number, b: number) => void;
export const demoworld_snapshot: (a: number) => [number, number];
export const demoworld_step: (a: number, b: number) => [number, number, number, number];
export const frame_sweep: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const ring_path: (a: number, b: number, c: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
