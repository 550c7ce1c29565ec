/**
 * Options page: service endpoint + shared token, and the explicit
 * override opt-in. Enabling override records the consent moment;
 * disabling keeps the original timestamp so re-enabling is still an
 * informed choice the user made once.
 */

import { DEFAULT_ENDPOINT } from "./client.js";
import { grantConsent, normalizeConsent, revokeOverride } from "./consent.js";

const endpointInput = document.getElementById("endpoint") as HTMLInputElement;
const tokenInput = document.getElementById("token") as HTMLInputElement;
const overrideInput = document.getElementById("override") as HTMLInputElement;
const statusLine = document.getElementById("status") as HTMLElement;

function load(): void {
  chrome.storage.local.get(
    ["endpoint", "token", "overrideEnabled", "consentedAt"],
    (stored) => {
      endpointInput.value = (stored.endpoint as string) || DEFAULT_ENDPOINT;
      tokenInput.value = (stored.token as string) || "";
      const consent = normalizeConsent(stored);
      overrideInput.checked = consent.overrideEnabled;
      statusLine.textContent = consent.consentedAt
        ? `Override consent recorded ${consent.consentedAt}`
        : "Override not enabled";
    },
  );
}

document.getElementById("save")?.addEventListener("click", () => {
  chrome.storage.local.get(["overrideEnabled", "consentedAt"], (stored) => {
    const previous = normalizeConsent(stored);
    const next = overrideInput.checked
      ? previous.consentedAt
        ? { ...previous, overrideEnabled: true }
        : grantConsent()
      : revokeOverride(previous);
    chrome.storage.local.set(
      {
        endpoint: endpointInput.value.trim() || DEFAULT_ENDPOINT,
        token: tokenInput.value.trim(),
        overrideEnabled: next.overrideEnabled,
        consentedAt: next.consentedAt,
      },
      load,
    );
  });
});

load();
