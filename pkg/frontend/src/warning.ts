/** Warning page entry point: fetch this tab's payload and render it. */

import type { GetPayloadResponse } from "./messages.js";
import { renderWarningPage } from "./warning-render.js";

function tabIdFromQuery(): number | null {
  const raw = new URLSearchParams(window.location.search).get("tab");
  const parsed = raw === null ? NaN : Number.parseInt(raw, 10);
  return Number.isInteger(parsed) ? parsed : null;
}

async function main(): Promise<void> {
  const root = document.getElementById("warning-root");
  const tabId = tabIdFromQuery();
  if (!root || tabId === null) {
    return;
  }
  const response = (await chrome.runtime.sendMessage({
    kind: "pxp-get-payload",
    tabId,
  })) as GetPayloadResponse;
  if (!response.payload) {
    root.textContent = "This warning has expired. Close the tab.";
    return;
  }
  renderWarningPage(document, root, response.payload, {
    onBack: () => void chrome.runtime.sendMessage({ kind: "pxp-back", tabId }),
    onProceed: () => void chrome.runtime.sendMessage({ kind: "pxp-proceed", tabId }),
  });
}

void main();
