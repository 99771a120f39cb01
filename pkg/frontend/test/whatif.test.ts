import { describe, expect, it } from "vitest";

import golden from "./fixtures/payload.json";
import type { DashboardPayload, ValueGainReport, WhatIfSpec } from "../src/types.js";
import {
  parseSelection,
  renderWhatIfResult,
  whatIfSentence,
} from "../src/render/whatif.js";
import {
  beginWhatIf,
  initialState,
  rejectWhatIf,
  resolveWhatIf,
  toggleShareMode,
} from "../src/state.js";
import { ApiClient, ApiError } from "../src/api.js";

const payload = golden as unknown as DashboardPayload;

function report(gain: number, se: number, spec: WhatIfSpec): ValueGainReport {
  return {
    spec: {
      kind: spec.kind,
      arm_id: spec.arm_id ?? null,
      field_name: spec.field_name ?? null,
    },
    v_pi: { kind: "on_policy", point: 2.0, se: 0.01, n: 2000, clipped_fraction: 0 },
    v_pibar: { kind: "ips", point: 2.0 - gain, se, n: 2000, clipped_fraction: 0 },
    gain,
    gain_se: se,
    relative_uplift: gain / (2.0 - gain),
    relative_uplift_defined: true,
  };
}

describe("what-if sentences", () => {
  it("identity displays zero gain verbatim", () => {
    const spec: WhatIfSpec = { kind: "identity" };
    const sentence = whatIfSentence(spec, report(0, 0, spec), payload);
    expect(sentence).toBe("No change (0.00).");
  });

  it("arm removal reads as a signed per-player change with uncertainty", () => {
    const spec: WhatIfSpec = { kind: "remove_arm", arm_id: "p299" };
    const sentence = whatIfSentence(spec, report(0.47, 0.08, spec), payload);
    expect(sentence).toBe(
      "Removing $2.99 would change value per player by -0.47 ± 0.08 USD."
    );
  });

  it("matches the variant table's expected benefit for the same arm", () => {
    const row = payload.variant_rows.find((r) => r.arm_id === "p299")!;
    const spec: WhatIfSpec = { kind: "remove_arm", arm_id: "p299" };
    const sentence = whatIfSentence(
      spec,
      report(row.expected_benefit, row.expected_benefit_se, spec),
      payload
    );
    const amount = (-row.expected_benefit).toFixed(2);
    expect(sentence).toContain(`by ${row.expected_benefit > 0 ? amount : `+${Math.abs(row.expected_benefit).toFixed(2)}`}`);
    expect(sentence).toContain(`± ${row.expected_benefit_se.toFixed(2)}`);
  });

  it("field removal names the field", () => {
    const spec: WhatIfSpec = { kind: "remove_context_field", field_name: "country" };
    const sentence = whatIfSentence(spec, report(0.3, 0.05, spec), payload);
    expect(sentence).toContain("Removing context field country");
  });
});

describe("selection parsing", () => {
  it("round-trips the selector values", () => {
    expect(parseSelection("identity")).toEqual({ kind: "identity" });
    expect(parseSelection("baseline_only")).toEqual({ kind: "baseline_only" });
    expect(parseSelection("remove_arm:p599")).toEqual({
      kind: "remove_arm",
      arm_id: "p599",
    });
    expect(parseSelection("remove_context_field:platform")).toEqual({
      kind: "remove_context_field",
      field_name: "platform",
    });
  });

  it("rejects unknown selections", () => {
    expect(() => parseSelection("explode:now")).toThrow();
  });
});

describe("result states", () => {
  it("renders a 422 as an inline validation message", () => {
    const html = renderWhatIfResult(
      { phase: "invalid", message: "unknown arm_id 'zz'" },
      payload
    );
    expect(html).toContain("inline-error");
    expect(html).toContain("unknown arm_id");
    expect(html).not.toContain("whatif-retry");
  });

  it("renders failures with a retry affordance", () => {
    const html = renderWhatIfResult({ phase: "failed", message: "timeout" }, payload);
    expect(html).toContain("whatif-retry");
  });
});

describe("newest-wins request state", () => {
  const specA: WhatIfSpec = { kind: "remove_arm", arm_id: "p299" };
  const specB: WhatIfSpec = { kind: "remove_arm", arm_id: "p599" };

  it("drops a stale resolution after a newer request begins", () => {
    let state = initialState();
    const first = beginWhatIf(state, specA);
    state = first.state;
    const second = beginWhatIf(state, specB);
    state = second.state;

    state = resolveWhatIf(state, first.token, specA, report(0.1, 0.02, specA));
    expect(state.whatIf.phase).toBe("pending"); // stale result ignored

    state = resolveWhatIf(state, second.token, specB, report(0.2, 0.02, specB));
    expect(state.whatIf.phase).toBe("done");
    if (state.whatIf.phase === "done") {
      expect(state.whatIf.spec).toEqual(specB);
    }
  });

  it("drops stale errors the same way", () => {
    let state = initialState();
    const first = beginWhatIf(state, specA);
    state = first.state;
    const second = beginWhatIf(state, specB);
    state = second.state;
    state = rejectWhatIf(state, first.token, "failed", "boom");
    expect(state.whatIf.phase).toBe("pending");
  });

  it("toggles share mode without touching the request state", () => {
    let state = initialState();
    const begun = beginWhatIf(state, specA);
    state = toggleShareMode(begun.state);
    expect(state.shareMode).toBe("predicted_best");
    expect(state.whatIf.phase).toBe("pending");
    expect(state.whatIfToken).toBe(begun.token);
  });
});

describe("api client", () => {
  function fakeFetch(status: number, body: unknown) {
    const calls: { url: string; init?: unknown }[] = [];
    const fn = async (url: string, init?: unknown) => {
      calls.push({ url, init });
      return { status, json: async () => body };
    };
    return { fn, calls };
  }

  it("fetches the dashboard from the experiment URL", async () => {
    const { fn, calls } = fakeFetch(200, payload);
    const client = new ApiClient("http://api.test/", "pricing-default", fn);
    const got = await client.dashboard();
    expect(got.experiment_id).toBe("pricing-default");
    expect(calls[0].url).toBe(
      "http://api.test/api/v1/experiments/pricing-default/dashboard"
    );
  });

  it("posts what-if specs and surfaces 422 details", async () => {
    const { fn, calls } = fakeFetch(422, { detail: "unknown arm_id 'zz'" });
    const client = new ApiClient("http://api.test", "pricing-default", fn);
    await expect(
      client.whatIf({ spec: { kind: "remove_arm", arm_id: "zz" } })
    ).rejects.toMatchObject({ status: 422, message: "unknown arm_id 'zz'" });
    const init = calls[0].init as { method: string; body: string };
    expect(init.method).toBe("POST");
    expect(JSON.parse(init.body).spec.arm_id).toBe("zz");
  });

  it("wraps non-200 responses in ApiError", async () => {
    const { fn } = fakeFetch(500, { detail: { error_code: "estimator_timeout" } });
    const client = new ApiClient("http://api.test", "pricing-default", fn);
    const error = await client
      .whatIf({ spec: { kind: "baseline_only" } })
      .catch((e: unknown) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect((error as ApiError).status).toBe(500);
  });
});
