/**
 * Recognition of upstream anti-phishing interstitials.
 *
 * Signatures ship as data so new provider page layouts can be matched
 * without code changes. Evaluation is strictly priority-ordered and stops
 * at the first hit, so at most one provider ever matches a tab and
 * overlapping signatures resolve deterministically.
 */

import type { Provider } from "./types.js";

export interface ProviderSignature {
  id: Exclude<Provider, "manual">;
  /** Lower values are evaluated first; must be unique per signature. */
  priority: number;
  /** Any of these substrings in the tab URL matches. */
  urlSubstrings: string[];
  /** Any of these substrings in the tab title matches. */
  titleSubstrings: string[];
  /** Any of these substrings in the rendered body text matches. */
  markerText: string[];
}

/** What the background can observe about a tab without injecting code. */
export interface TabView {
  url: string;
  title: string;
  bodyText?: string;
}

export const PROVIDER_SIGNATURES: ProviderSignature[] = [
  {
    id: "gsb",
    priority: 10,
    urlSubstrings: ["safebrowsing", "chrome-error://"],
    titleSubstrings: ["Deceptive site ahead", "Security error"],
    markerText: ["Deceptive site ahead", "Attackers on the site you"],
  },
  {
    id: "avast_online_security",
    priority: 20,
    urlSubstrings: ["avast.com/blocked"],
    titleSubstrings: ["Avast: Website blocked"],
    markerText: ["Avast Online Security", "has blocked this website"],
  },
  {
    id: "bitdefender_trafficlight",
    priority: 30,
    urlSubstrings: ["trafficlight.bitdefender"],
    titleSubstrings: ["Bitdefender alert"],
    markerText: ["Bitdefender TrafficLight", "fraudulent page"],
  },
  {
    id: "norton_safe_web",
    priority: 40,
    urlSubstrings: ["safeweb.norton"],
    titleSubstrings: ["Norton Safe Web"],
    markerText: ["Norton Safe Web", "known dangerous webpage"],
  },
  {
    id: "trend_micro_toolbar",
    priority: 50,
    urlSubstrings: ["trendmicro.com/blocked"],
    titleSubstrings: ["Trend Micro"],
    markerText: ["blocked by Trend Micro", "Dangerous Page"],
  },
];

function anySubstring(haystack: string, needles: string[]): boolean {
  return needles.some((needle) => needle.length > 0 && haystack.includes(needle));
}

function matches(signature: ProviderSignature, tab: TabView): boolean {
  return (
    anySubstring(tab.url, signature.urlSubstrings) ||
    anySubstring(tab.title, signature.titleSubstrings) ||
    anySubstring(tab.bodyText ?? "", signature.markerText)
  );
}

/** First-match detection in ascending priority order; null for benign tabs. */
export function detectProvider(
  tab: TabView,
  signatures: ProviderSignature[] = PROVIDER_SIGNATURES,
): ProviderSignature | null {
  const ordered = [...signatures].sort(
    (a, b) => a.priority - b.priority || a.id.localeCompare(b.id),
  );
  for (const signature of ordered) {
    if (matches(signature, tab)) {
      return signature;
    }
  }
  return null;
}
