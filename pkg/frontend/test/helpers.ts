import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { expect } from "vitest";

import type { ExplainService, SurfacePresenter } from "../src/tabflow.js";
import type {
  ExplainEnvelope,
  ExplainRequest,
  HealthBody,
  WarningPayload,
} from "../src/types.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

/** Recorded service envelopes, captured verbatim from a live run. */
export function loadEnvelope(name: string): ExplainEnvelope {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as ExplainEnvelope;
}

export function loadPayload(featureCount: 1 | 2 | 3 | 4): WarningPayload {
  const envelope = loadEnvelope(`envelope_ok_${featureCount}_features.json`);
  if (!envelope.payload) {
    throw new Error("fixture envelope has no payload");
  }
  return envelope.payload;
}

export const HEALTHY: HealthBody = {
  status: "healthy",
  runtime: true,
  renderer: true,
  model: "fixture",
  version: "0.1.0",
};

export class FakeService implements ExplainService {
  explainCalls: ExplainRequest[] = [];
  healthCalls = 0;
  explainImpl: (request: ExplainRequest) => Promise<ExplainEnvelope> = async () =>
    loadEnvelope("envelope_ok_2_features.json");
  healthImpl: () => Promise<HealthBody> = async () => HEALTHY;

  explain(request: ExplainRequest): Promise<ExplainEnvelope> {
    this.explainCalls.push(request);
    return this.explainImpl(request);
  }

  health(): Promise<HealthBody> {
    this.healthCalls += 1;
    return this.healthImpl();
  }
}

export interface PresenterCall {
  kind: "placeholder" | "warning" | "restore" | "notice";
  tabId: number;
  payload?: WarningPayload;
  detail?: string;
}

export class RecordingPresenter implements SurfacePresenter {
  calls: PresenterCall[] = [];

  showPlaceholder(tabId: number): void {
    this.calls.push({ kind: "placeholder", tabId });
  }

  showWarning(tabId: number, payload: WarningPayload): void {
    this.calls.push({ kind: "warning", tabId, payload });
  }

  restoreProviderWarning(tabId: number): void {
    this.calls.push({ kind: "restore", tabId });
  }

  showUnavailableNotice(tabId: number, detail: string): void {
    this.calls.push({ kind: "notice", tabId, detail });
  }

  kinds(): string[] {
    return this.calls.map((call) => call.kind);
  }
}

/**
 * Safety monotonicity for an override flow: every surface the presenter
 * was asked to show is a warning surface, and if the override began
 * (placeholder shown) it ended in a terminal warning surface — the
 * explainable warning or the restored provider interstitial. A tab that
 * never left the provider's own warning (no calls at all) is also safe.
 */
export function expectAlwaysWarned(calls: PresenterCall[]): void {
  for (const call of calls) {
    expect(["placeholder", "warning", "restore"]).toContain(call.kind);
  }
  const kinds = calls.map((call) => call.kind);
  const began = kinds.indexOf("placeholder");
  if (began >= 0) {
    const terminal = kinds[kinds.length - 1];
    expect(["warning", "restore"]).toContain(terminal);
  }
}

/** A promise whose settlement the test controls. */
export function deferred<T>(): {
  promise: Promise<T>;
  resolve: (value: T) => void;
  reject: (error: unknown) => void;
} {
  let resolve!: (value: T) => void;
  let reject!: (error: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}
