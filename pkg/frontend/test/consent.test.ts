import { describe, expect, it } from "vitest";

import {
  canOverride,
  grantConsent,
  NO_CONSENT,
  normalizeConsent,
  revokeOverride,
} from "../src/consent.js";

describe("consent", () => {
  it("override is off until explicitly granted", () => {
    expect(canOverride(NO_CONSENT)).toBe(false);
  });

  it("granting records the moment and enables override", () => {
    const state = grantConsent(new Date("2026-08-15T10:00:00Z"));
    expect(state).toEqual({ overrideEnabled: true, consentedAt: "2026-08-15T10:00:00.000Z" });
    expect(canOverride(state)).toBe(true);
  });

  it("revoking disables override but keeps the consent record", () => {
    const revoked = revokeOverride(grantConsent(new Date("2026-08-15T10:00:00Z")));
    expect(canOverride(revoked)).toBe(false);
    expect(revoked.consentedAt).not.toBeNull();
  });

  it("an enabled flag without a timestamp is repaired to disabled", () => {
    expect(normalizeConsent({ overrideEnabled: true })).toEqual(NO_CONSENT);
    expect(normalizeConsent({ overrideEnabled: true, consentedAt: null })).toEqual(NO_CONSENT);
    expect(normalizeConsent(undefined)).toEqual(NO_CONSENT);
  });

  it("a stored valid state round-trips", () => {
    const stored = { overrideEnabled: true, consentedAt: "2026-08-01T00:00:00.000Z" };
    expect(normalizeConsent(stored)).toEqual(stored);
    expect(canOverride(normalizeConsent(stored))).toBe(true);
  });
});
