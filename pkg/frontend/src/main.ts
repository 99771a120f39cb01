import { ApiClient, ApiError } from "./api.js";
import { renderDashboard } from "./render/dashboard.js";
import { renderWhatIfResult, parseSelection } from "./render/whatif.js";
import {
  beginWhatIf,
  initialState,
  rejectWhatIf,
  resolveWhatIf,
  toggleShareMode,
  type ViewState,
} from "./state.js";
import type { DashboardPayload, WhatIfSpec } from "./types.js";

/**
 * Browser bootstrap. All rendering goes through the pure string renderers;
 * this module only wires fetch + events to the #app root.
 */

declare global {
  interface Window {
    BANDIT_LENS_API_BASE?: string;
    BANDIT_LENS_EXPERIMENT_ID?: string;
  }
}

function apiClient(): ApiClient {
  const base = window.BANDIT_LENS_API_BASE ?? "http://127.0.0.1:8080";
  const experimentId = window.BANDIT_LENS_EXPERIMENT_ID ?? "pricing-default";
  return new ApiClient(base, experimentId);
}

async function run(root: HTMLElement): Promise<void> {
  const client = apiClient();
  let state: ViewState = initialState();
  let payload: DashboardPayload;
  try {
    payload = await client.dashboard();
  } catch (error) {
    root.innerHTML = `<div class="upgrade-notice">Could not load the dashboard: ${String(
      error
    )}</div>`;
    return;
  }

  const rerender = () => {
    root.innerHTML = renderDashboard(payload, state.shareMode);
    const resultHost = root.querySelector<HTMLElement>("#whatif-result");
    if (resultHost) {
      resultHost.innerHTML = renderWhatIfResult(state.whatIf, payload);
    }
    wire();
  };

  const submit = async (spec: WhatIfSpec) => {
    const begun = beginWhatIf(state, spec);
    state = begun.state;
    renderResult();
    try {
      const report = await client.whatIf({ spec });
      state = resolveWhatIf(state, begun.token, spec, report);
    } catch (error) {
      const kind = error instanceof ApiError && error.status === 422 ? "invalid" : "failed";
      state = rejectWhatIf(state, begun.token, kind, String((error as Error).message));
    }
    renderResult();
  };

  const renderResult = () => {
    const host = root.querySelector<HTMLElement>("#whatif-result");
    if (host) {
      host.innerHTML = renderWhatIfResult(state.whatIf, payload);
      const retry = host.querySelector<HTMLButtonElement>("#whatif-retry");
      if (retry) {
        retry.addEventListener("click", () => void submit(currentSelection()));
      }
    }
  };

  const currentSelection = (): WhatIfSpec => {
    const select = root.querySelector<HTMLSelectElement>("#whatif-selection");
    return parseSelection(select?.value ?? "identity");
  };

  const wire = () => {
    const toggle = root.querySelector<HTMLInputElement>("#share-mode-toggle");
    if (toggle) {
      toggle.addEventListener("change", () => {
        state = toggleShareMode(state);
        rerender();
      });
    }
    const form = root.querySelector<HTMLFormElement>("#whatif-form");
    if (form) {
      form.addEventListener("submit", (event) => {
        event.preventDefault();
        void submit(currentSelection());
      });
    }
  };

  rerender();
}

const root = document.getElementById("app");
if (root) {
  void run(root);
}
