/**
 * Per-tab warning flow.
 *
 * Safety rule, enforced structurally here: once a provider warning has
 * fired for a tab, every surface this flow asks the presenter to show is
 * itself a warning surface (placeholder, explainable warning, or the
 * restored provider interstitial). There is no code path that returns
 * the tab to the raw page — on any failure after the override started,
 * the provider warning is restored.
 *
 * Dormancy is also structural: the service is contacted only from
 * `handleProviderWarning` and `handleIconClick`; snapshot and navigation
 * events never trigger requests.
 *
 * Staleness: each tab carries a navigation epoch and at most one
 * outstanding request id; a response whose (epoch, request id) no longer
 * matches is discarded without touching the tab.
 */

import type { PageSnapshot, SnapshotStore } from "./capture.js";
import { canOverride, type UserConsentState } from "./consent.js";
import type {
  ExplainEnvelope,
  ExplainRequest,
  HealthBody,
  Provider,
  WarningPayload,
} from "./types.js";

export interface ExplainService {
  explain(request: ExplainRequest): Promise<ExplainEnvelope>;
  health(): Promise<HealthBody>;
}

/** The only ways this flow can change what a tab displays. */
export interface SurfacePresenter {
  showPlaceholder(tabId: number): void;
  showWarning(tabId: number, payload: WarningPayload): void;
  /** Bring back the provider's own interstitial (override flow failures). */
  restoreProviderWarning(tabId: number): void;
  /** Non-blocking notice for on-demand failures; the page stays as-is. */
  showUnavailableNotice(tabId: number, detail: string): void;
}

interface TabState {
  epoch: number;
  activeRequest: number | null;
  /** Epoch in which a provider warning was already handled (idempotence). */
  overriddenEpoch: number | null;
}

export interface NavigationInfo {
  url: string;
  /** True when the destination is itself a provider interstitial. */
  isProviderInterstitial: boolean;
}

export class TabFlow {
  private requestSeq = 0;
  private readonly tabs = new Map<number, TabState>();

  constructor(
    private readonly service: ExplainService,
    private readonly presenter: SurfacePresenter,
    private readonly consent: () => UserConsentState,
    private readonly snapshots: SnapshotStore,
  ) {}

  private state(tabId: number): TabState {
    let state = this.tabs.get(tabId);
    if (!state) {
      state = { epoch: 0, activeRequest: null, overriddenEpoch: null };
      this.tabs.set(tabId, state);
    }
    return state;
  }

  recordSnapshot(tabId: number, snapshot: PageSnapshot): void {
    this.snapshots.record(tabId, snapshot);
  }

  /**
   * A committed navigation invalidates any in-flight request for the tab.
   * The retained snapshot survives only a navigation to a provider
   * interstitial — that snapshot is exactly what gets analyzed, because
   * the interstitial itself blocks DOM access to the flagged page.
   */
  handleNavigation(tabId: number, info: NavigationInfo): void {
    const state = this.state(tabId);
    state.epoch += 1;
    state.activeRequest = null;
    if (!info.isProviderInterstitial) {
      this.snapshots.drop(tabId);
      state.overriddenEpoch = null;
    }
  }

  handleTabClosed(tabId: number): void {
    this.snapshots.drop(tabId);
    this.tabs.delete(tabId);
  }

  /** A provider interstitial fired for this tab. */
  async handleProviderWarning(tabId: number, provider: Exclude<Provider, "manual">): Promise<void> {
    const state = this.state(tabId);
    if (state.overriddenEpoch === state.epoch) {
      return; // duplicate detection event for the same page view
    }
    if (!canOverride(this.consent())) {
      return; // no consent: the provider's own warning stays up
    }
    const snapshot = this.snapshots.take(tabId);
    if (snapshot === null) {
      return; // nothing captured before the interstitial: stay safe, do nothing
    }
    // Claim this page view before the first await so duplicate detection
    // events (tabs fire several per load) cannot start a second flow.
    state.overriddenEpoch = state.epoch;
    try {
      await this.service.health();
    } catch {
      return; // service down: never trade a live warning for a dead end
    }

    this.presenter.showPlaceholder(tabId);
    await this.runExplain(tabId, snapshot, provider, "override");
  }

  /** Toolbar icon clicked: explain on demand without touching the page. */
  async handleIconClick(tabId: number): Promise<void> {
    const snapshot = this.snapshots.take(tabId);
    if (snapshot === null) {
      this.presenter.showUnavailableNotice(tabId, "page not captured yet");
      return;
    }
    await this.runExplain(tabId, snapshot, "manual", "on_demand");
  }

  private async runExplain(
    tabId: number,
    snapshot: PageSnapshot,
    provider: Provider,
    mode: "override" | "on_demand",
  ): Promise<void> {
    const state = this.state(tabId);
    const requestId = ++this.requestSeq;
    const epoch = state.epoch;
    state.activeRequest = requestId;

    let envelope: ExplainEnvelope | null = null;
    let failure = "";
    try {
      envelope = await this.service.explain({
        url: snapshot.url,
        html: snapshot.html,
        provider,
        mode,
      });
    } catch (error) {
      failure = String(error instanceof Error ? error.message : error);
    }

    if (state.epoch !== epoch || state.activeRequest !== requestId) {
      return; // stale: the tab moved on while we were waiting
    }
    state.activeRequest = null;

    if (envelope?.status === "ok" && envelope.payload) {
      this.presenter.showWarning(tabId, envelope.payload);
      return;
    }
    if (mode === "override") {
      // No explainable result (clean verdict, error envelope, timeout,
      // outage): the user must still be warned, so the provider's
      // interstitial comes back.
      this.presenter.restoreProviderWarning(tabId);
      return;
    }
    this.presenter.showUnavailableNotice(
      tabId,
      envelope ? (envelope.error_detail ?? "no indicators found") : failure,
    );
  }
}
