import type { ValueGainReport, WhatIfSpec } from "./types.js";

/**
 * Display state for the dashboard view: the share-column toggle and the
 * single in-flight what-if request. Pure transition functions so the
 * newest-wins cancellation is testable without a DOM.
 */

export type WhatIfPhase =
  | { phase: "idle" }
  | { phase: "pending"; spec: WhatIfSpec }
  | { phase: "done"; spec: WhatIfSpec; report: ValueGainReport }
  | { phase: "invalid"; message: string }
  | { phase: "failed"; message: string };

export interface ViewState {
  shareMode: "display" | "predicted_best";
  whatIfToken: number;
  whatIf: WhatIfPhase;
}

export function initialState(): ViewState {
  return { shareMode: "display", whatIfToken: 0, whatIf: { phase: "idle" } };
}

export function toggleShareMode(state: ViewState): ViewState {
  return {
    ...state,
    shareMode: state.shareMode === "display" ? "predicted_best" : "display",
  };
}

/** Start a request; the returned token must accompany its resolution. */
export function beginWhatIf(
  state: ViewState,
  spec: WhatIfSpec
): { state: ViewState; token: number } {
  const token = state.whatIfToken + 1;
  return {
    state: { ...state, whatIfToken: token, whatIf: { phase: "pending", spec } },
    token,
  };
}

function isCurrent(state: ViewState, token: number): boolean {
  return token === state.whatIfToken && state.whatIf.phase === "pending";
}

/** Newest wins: resolutions carrying a stale token are dropped. */
export function resolveWhatIf(
  state: ViewState,
  token: number,
  spec: WhatIfSpec,
  report: ValueGainReport
): ViewState {
  if (!isCurrent(state, token)) {
    return state;
  }
  return { ...state, whatIf: { phase: "done", spec, report } };
}

export function rejectWhatIf(
  state: ViewState,
  token: number,
  kind: "invalid" | "failed",
  message: string
): ViewState {
  if (!isCurrent(state, token)) {
    return state;
  }
  return { ...state, whatIf: { phase: kind, message } };
}
