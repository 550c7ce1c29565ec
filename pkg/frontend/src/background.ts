/**
 * Background service worker: observes tabs, stores snapshots, detects
 * provider interstitials, and drives the TabFlow. All decisions live in
 * TabFlow; this file only adapts chrome.* events in and tab navigations
 * out.
 */

import { SnapshotStore } from "./capture.js";
import { ServiceClient } from "./client.js";
import { normalizeConsent, type UserConsentState } from "./consent.js";
import type { ExtensionMessage, GetPayloadResponse } from "./messages.js";
import { detectProvider } from "./providers.js";
import { TabFlow, type SurfacePresenter } from "./tabflow.js";
import type { WarningPayload } from "./types.js";

interface StoredSettings {
  endpoint?: string;
  token?: string;
  overrideEnabled?: boolean;
  consentedAt?: string | null;
}

let settings: StoredSettings = {};
let client = new ServiceClient();
let consent: UserConsentState = normalizeConsent(undefined);

function applySettings(stored: StoredSettings): void {
  settings = stored;
  client = new ServiceClient({ baseUrl: stored.endpoint, token: stored.token });
  consent = normalizeConsent(stored);
}

chrome.storage.local.get(
  ["endpoint", "token", "overrideEnabled", "consentedAt"],
  (stored) => applySettings(stored as StoredSettings),
);
chrome.storage.onChanged.addListener((_changes, area) => {
  if (area === "local") {
    chrome.storage.local.get(
      ["endpoint", "token", "overrideEnabled", "consentedAt"],
      (stored) => applySettings(stored as StoredSettings),
    );
  }
});

// Per-tab context the warning page needs back from us.
const payloads = new Map<number, WarningPayload>();
const providerUrls = new Map<number, string>();

const SAFE_PAGE = "about:blank";

const presenter: SurfacePresenter = {
  showPlaceholder(tabId) {
    void chrome.tabs.update(tabId, {
      url: chrome.runtime.getURL(`placeholder.html?tab=${tabId}`),
    });
  },
  showWarning(tabId, payload) {
    payloads.set(tabId, payload);
    void chrome.tabs.update(tabId, {
      url: chrome.runtime.getURL(`warning.html?tab=${tabId}`),
    });
  },
  restoreProviderWarning(tabId) {
    const providerUrl = providerUrls.get(tabId);
    void chrome.tabs.update(tabId, { url: providerUrl ?? SAFE_PAGE });
  },
  showUnavailableNotice(tabId, detail) {
    void chrome.action.setBadgeText({ tabId, text: "!" });
    void chrome.action.setTitle({ tabId, title: `Explanation unavailable: ${detail}` });
  },
};

const snapshots = new SnapshotStore();
const flow = new TabFlow(
  { explain: (request) => client.explain(request), health: () => client.health() },
  presenter,
  () => consent,
  snapshots,
);

function isExtensionPage(url: string | undefined): boolean {
  return url !== undefined && url.startsWith(chrome.runtime.getURL(""));
}

chrome.runtime.onMessage.addListener((message: ExtensionMessage, sender, sendResponse) => {
  if (message.kind === "pxp-snapshot" && sender.tab?.id !== undefined) {
    flow.recordSnapshot(sender.tab.id, {
      url: message.url,
      html: message.html,
      capturedAt: Date.now(),
    });
    return;
  }
  if (message.kind === "pxp-get-payload") {
    const response: GetPayloadResponse = {
      payload: payloads.get(message.tabId) ?? null,
      originalUrl: snapshots.take(message.tabId)?.url ?? null,
    };
    sendResponse(response);
    return;
  }
  if (message.kind === "pxp-back") {
    void chrome.tabs.update(message.tabId, { url: SAFE_PAGE });
    return;
  }
  if (message.kind === "pxp-proceed") {
    const target = snapshots.take(message.tabId)?.url;
    if (target) {
      void chrome.tabs.update(message.tabId, { url: target });
    }
  }
});

chrome.webNavigation.onCommitted.addListener((details) => {
  if (details.frameId !== 0 || isExtensionPage(details.url)) {
    return; // our own placeholder/warning pages are not navigations away
  }
  const interstitial = detectProvider({ url: details.url, title: "" }) !== null;
  flow.handleNavigation(details.tabId, { url: details.url, isProviderInterstitial: interstitial });
});

chrome.tabs.onUpdated.addListener((tabId, changeInfo, tab) => {
  if (isExtensionPage(tab.url)) {
    return;
  }
  if (changeInfo.status !== "complete" && changeInfo.title === undefined) {
    return;
  }
  const match = detectProvider({ url: tab.url ?? "", title: tab.title ?? "" });
  if (match !== null) {
    providerUrls.set(tabId, tab.url ?? SAFE_PAGE);
    void flow.handleProviderWarning(tabId, match.id);
  }
});

chrome.action.onClicked.addListener((tab) => {
  if (tab.id !== undefined) {
    void flow.handleIconClick(tab.id);
  }
});

chrome.tabs.onRemoved.addListener((tabId) => {
  flow.handleTabClosed(tabId);
  payloads.delete(tabId);
  providerUrls.delete(tabId);
});
