/**
 * Per-tab DOM snapshot bookkeeping.
 *
 * The content script snapshots every page opportunistically once it has
 * loaded and the network has been idle; this store keeps only the most
 * recent snapshot per tab. When a provider interstitial replaces the
 * page the DOM is no longer reachable, so the flow falls back to the
 * snapshot taken just before — which is why navigation *to* an
 * interstitial must not drop it, while any other navigation must.
 */

export interface PageSnapshot {
  url: string;
  html: string;
  capturedAt: number;
}

export class SnapshotStore {
  private readonly latest = new Map<number, PageSnapshot>();

  record(tabId: number, snapshot: PageSnapshot): void {
    this.latest.set(tabId, snapshot);
  }

  take(tabId: number): PageSnapshot | null {
    return this.latest.get(tabId) ?? null;
  }

  drop(tabId: number): void {
    this.latest.delete(tabId);
  }

  size(): number {
    return this.latest.size;
  }
}
