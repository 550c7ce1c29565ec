import { describe, expect, it } from "vitest";

import { SnapshotStore } from "../src/capture.js";
import { grantConsent, NO_CONSENT, type UserConsentState } from "../src/consent.js";
import { ServiceDown, ServiceTimeout } from "../src/client.js";
import { TabFlow } from "../src/tabflow.js";
import type { ExplainEnvelope } from "../src/types.js";
import {
  deferred,
  expectAlwaysWarned,
  FakeService,
  loadEnvelope,
  RecordingPresenter,
} from "./helpers.js";

const TAB = 7;
const VICTIM = {
  url: "https://rnetflix-billing.example.test/login",
  html: "<h1>Verify your account</h1>",
  capturedAt: 1000,
};

function makeFlow(consent: UserConsentState = grantConsent(new Date("2026-08-01T00:00:00Z"))) {
  const service = new FakeService();
  const presenter = new RecordingPresenter();
  const snapshots = new SnapshotStore();
  const flow = new TabFlow(service, presenter, () => consent, snapshots);
  return { flow, service, presenter, snapshots };
}

/** The tab was flagged; the pre-interstitial snapshot is already stored. */
function flagged(flow: TabFlow) {
  flow.recordSnapshot(TAB, VICTIM);
  flow.handleNavigation(TAB, {
    url: "https://safebrowsing.example/interstitial",
    isProviderInterstitial: true,
  });
}

describe("override flow — safety monotonicity", () => {
  it("success path: placeholder, then the explainable warning", async () => {
    const { flow, service, presenter } = makeFlow();
    flagged(flow);
    await flow.handleProviderWarning(TAB, "gsb");

    expect(presenter.kinds()).toEqual(["placeholder", "warning"]);
    expectAlwaysWarned(presenter.calls);
    expect(service.explainCalls).toEqual([
      { url: VICTIM.url, html: VICTIM.html, provider: "gsb", mode: "override" },
    ]);
  });

  it("timeout path: the provider warning is restored", async () => {
    const { flow, service, presenter } = makeFlow();
    service.explainImpl = async () => {
      throw new ServiceTimeout("explain did not answer within 30000 ms");
    };
    flagged(flow);
    await flow.handleProviderWarning(TAB, "gsb");

    expect(presenter.kinds()).toEqual(["placeholder", "restore"]);
    expectAlwaysWarned(presenter.calls);
  });

  it("service dies mid-request: the provider warning is restored", async () => {
    const { flow, service, presenter } = makeFlow();
    service.explainImpl = async () => {
      throw new ServiceDown("connection refused");
    };
    flagged(flow);
    await flow.handleProviderWarning(TAB, "norton_safe_web");

    expect(presenter.kinds()).toEqual(["placeholder", "restore"]);
    expectAlwaysWarned(presenter.calls);
  });

  it("service down before starting: the provider warning is never replaced", async () => {
    const { flow, service, presenter } = makeFlow();
    service.healthImpl = async () => {
      throw new ServiceDown("connection refused");
    };
    flagged(flow);
    await flow.handleProviderWarning(TAB, "gsb");

    expect(presenter.calls).toEqual([]); // provider interstitial stays up
    expect(service.explainCalls).toEqual([]);
    expectAlwaysWarned(presenter.calls);
  });

  it("clean verdict still leaves the user warned", async () => {
    const { flow, service, presenter } = makeFlow();
    service.explainImpl = async () => loadEnvelope("envelope_no_indicators.json");
    flagged(flow);
    await flow.handleProviderWarning(TAB, "gsb");

    expect(presenter.kinds()).toEqual(["placeholder", "restore"]);
    expectAlwaysWarned(presenter.calls);
  });

  it("the payload shown is exactly the envelope payload", async () => {
    const { flow, presenter } = makeFlow();
    flagged(flow);
    await flow.handleProviderWarning(TAB, "gsb");

    const shown = presenter.calls[1];
    expect(shown?.kind).toBe("warning");
    expect(shown?.payload).toEqual(loadEnvelope("envelope_ok_2_features.json").payload);
  });
});

describe("dormancy", () => {
  it("snapshots and navigations alone never contact the service", () => {
    const { flow, service, presenter } = makeFlow();
    flow.recordSnapshot(TAB, VICTIM);
    flow.handleNavigation(TAB, { url: "https://a.example/", isProviderInterstitial: false });
    flow.recordSnapshot(TAB, { ...VICTIM, url: "https://a.example/" });
    flow.handleNavigation(TAB, { url: "https://b.example/", isProviderInterstitial: false });
    flow.handleTabClosed(TAB);

    expect(service.explainCalls).toEqual([]);
    expect(service.healthCalls).toBe(0);
    expect(presenter.calls).toEqual([]);
  });
});

describe("consent gating", () => {
  it("no consent: the override never starts", async () => {
    const { flow, service, presenter } = makeFlow(NO_CONSENT);
    flagged(flow);
    await flow.handleProviderWarning(TAB, "gsb");

    expect(presenter.calls).toEqual([]);
    expect(service.explainCalls).toEqual([]);
    expect(service.healthCalls).toBe(0);
  });

  it("an enabled flag without a recorded consent moment does not count", async () => {
    const { flow, service, presenter } = makeFlow({ overrideEnabled: true, consentedAt: null });
    flagged(flow);
    await flow.handleProviderWarning(TAB, "gsb");

    expect(presenter.calls).toEqual([]);
    expect(service.explainCalls).toEqual([]);
  });
});

describe("staleness", () => {
  it("a response landing after navigation is discarded", async () => {
    const { flow, service, presenter } = makeFlow();
    const gate = deferred<ExplainEnvelope>();
    service.explainImpl = () => gate.promise;
    flagged(flow);
    const run = flow.handleProviderWarning(TAB, "gsb");
    await Promise.resolve(); // let the flow pass its health probe
    expect(presenter.kinds()).toEqual(["placeholder"]);

    flow.handleNavigation(TAB, { url: "https://elsewhere.example/", isProviderInterstitial: false });
    gate.resolve(loadEnvelope("envelope_ok_2_features.json"));
    await run;

    expect(presenter.kinds()).toEqual(["placeholder"]); // nothing after the move
  });

  it("a superseded on-demand response is discarded by request id", async () => {
    const { flow, service, presenter } = makeFlow();
    const first = deferred<ExplainEnvelope>();
    const second = deferred<ExplainEnvelope>();
    const gates = [first, second];
    service.explainImpl = () => gates.shift()!.promise;
    flow.recordSnapshot(TAB, VICTIM);

    const run1 = flow.handleIconClick(TAB);
    const run2 = flow.handleIconClick(TAB);
    first.resolve(loadEnvelope("envelope_no_indicators.json")); // stale: would show a notice
    second.resolve(loadEnvelope("envelope_ok_2_features.json"));
    await Promise.all([run1, run2]);

    expect(presenter.kinds()).toEqual(["warning"]); // only the newest request lands
  });

  it("duplicate provider detections for one page view run the flow once", async () => {
    const { flow, service, presenter } = makeFlow();
    flagged(flow);
    await Promise.all([
      flow.handleProviderWarning(TAB, "gsb"),
      flow.handleProviderWarning(TAB, "gsb"),
    ]);
    await flow.handleProviderWarning(TAB, "gsb");

    expect(service.explainCalls).toHaveLength(1);
    expect(presenter.kinds()).toEqual(["placeholder", "warning"]);
  });
});

describe("capture fallback", () => {
  it("analyzes the snapshot taken before the interstitial replaced the page", async () => {
    const { flow, service } = makeFlow();
    flow.recordSnapshot(TAB, VICTIM);
    flow.handleNavigation(TAB, {
      url: "https://safebrowsing.example/block",
      isProviderInterstitial: true,
    });
    await flow.handleProviderWarning(TAB, "gsb");

    expect(service.explainCalls[0]?.url).toBe(VICTIM.url);
    expect(service.explainCalls[0]?.html).toBe(VICTIM.html);
  });

  it("an ordinary navigation drops the snapshot; without one the flow stays put", async () => {
    const { flow, service, presenter, snapshots } = makeFlow();
    flow.recordSnapshot(TAB, VICTIM);
    flow.handleNavigation(TAB, { url: "https://other.example/", isProviderInterstitial: false });
    expect(snapshots.take(TAB)).toBeNull();

    await flow.handleProviderWarning(TAB, "gsb");
    expect(presenter.calls).toEqual([]); // provider warning remains; no blind analysis
    expect(service.explainCalls).toEqual([]);
  });
});

describe("on-demand flow", () => {
  it("success shows the warning without any restore", async () => {
    const { flow, service, presenter } = makeFlow(NO_CONSENT); // no override consent needed
    flow.recordSnapshot(TAB, VICTIM);
    await flow.handleIconClick(TAB);

    expect(presenter.kinds()).toEqual(["warning"]);
    expect(service.explainCalls).toEqual([
      { url: VICTIM.url, html: VICTIM.html, provider: "manual", mode: "on_demand" },
    ]);
  });

  it("failure shows a notice and leaves the page alone", async () => {
    const { flow, service, presenter } = makeFlow();
    service.explainImpl = async () => {
      throw new ServiceDown("connection refused");
    };
    flow.recordSnapshot(TAB, VICTIM);
    await flow.handleIconClick(TAB);

    expect(presenter.kinds()).toEqual(["notice"]);
  });

  it("clean verdict reports itself instead of inventing a warning", async () => {
    const { flow, service, presenter } = makeFlow();
    service.explainImpl = async () => loadEnvelope("envelope_no_indicators.json");
    flow.recordSnapshot(TAB, VICTIM);
    await flow.handleIconClick(TAB);

    expect(presenter.kinds()).toEqual(["notice"]);
    expect(presenter.calls[0]?.detail).toContain("no user-facing indicators");
  });
});
