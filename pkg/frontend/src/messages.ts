/** Internal extension messaging protocol (content script / pages ↔ background). */

import type { WarningPayload } from "./types.js";

export interface SnapshotMessage {
  kind: "pxp-snapshot";
  url: string;
  html: string;
}

export interface GetPayloadMessage {
  kind: "pxp-get-payload";
  tabId: number;
}

export interface GetPayloadResponse {
  payload: WarningPayload | null;
  originalUrl: string | null;
}

export interface BackToSafetyMessage {
  kind: "pxp-back";
  tabId: number;
}

export interface ProceedMessage {
  kind: "pxp-proceed";
  tabId: number;
}

export type ExtensionMessage =
  | SnapshotMessage
  | GetPayloadMessage
  | BackToSafetyMessage
  | ProceedMessage;
