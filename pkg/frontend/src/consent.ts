/**
 * Override consent. Replacing a provider's warning with our own is only
 * allowed after the user has explicitly opted in; the opt-in moment is
 * recorded so an enabled flag without a timestamp is treated as invalid
 * and coerced off.
 */

export interface UserConsentState {
  overrideEnabled: boolean;
  /** ISO-8601 timestamp of the explicit opt-in; null when never granted. */
  consentedAt: string | null;
}

export const NO_CONSENT: UserConsentState = { overrideEnabled: false, consentedAt: null };

export function canOverride(state: UserConsentState): boolean {
  return state.overrideEnabled && state.consentedAt !== null;
}

export function grantConsent(now: Date = new Date()): UserConsentState {
  return { overrideEnabled: true, consentedAt: now.toISOString() };
}

export function revokeOverride(state: UserConsentState): UserConsentState {
  return { ...state, overrideEnabled: false };
}

/** Repair a state loaded from storage: enabled-without-timestamp is invalid. */
export function normalizeConsent(state: Partial<UserConsentState> | undefined): UserConsentState {
  const consentedAt = typeof state?.consentedAt === "string" ? state.consentedAt : null;
  const overrideEnabled = state?.overrideEnabled === true && consentedAt !== null;
  return { overrideEnabled, consentedAt };
}
