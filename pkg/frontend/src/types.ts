/**
 * Wire types for the local explain service. These mirror the service's
 * JSON bodies field-for-field; do not rename members.
 */

export type Provider =
  | "gsb"
  | "avast_online_security"
  | "bitdefender_trafficlight"
  | "norton_safe_web"
  | "trend_micro_toolbar"
  | "manual";

export type ExplainMode = "override" | "on_demand";

export interface ExplainRequest {
  url: string;
  html: string;
  provider?: Provider;
  mode?: ExplainMode;
}

export interface PayloadFeature {
  element_id: number;
  feature_id: string;
  name: string;
  explanation: string;
  artifacts: string[];
  color: string;
  snippet: string;
}

export interface WarningPayload {
  url: string;
  screenshot: {
    png_base64: string;
    width: number;
    height: number;
  };
  features: PayloadFeature[];
  generated_at: string;
  timings_ms: Record<string, number>;
}

export type EnvelopeStatus = "ok" | "no_indicators" | "error";

export interface ExplainEnvelope {
  status: EnvelopeStatus;
  payload: WarningPayload | null;
  error_detail: string | null;
}

export interface HealthBody {
  status: "healthy" | "degraded";
  runtime: boolean;
  renderer: boolean;
  model: string;
  version: string;
}
