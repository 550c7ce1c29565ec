/**
 * Network-idle trigger: fires once, after `idleMs` with no reported
 * activity. Capture quality depends on late-arriving content, so the
 * snapshot is taken only when the page has loaded AND the network has
 * stayed quiet for the window.
 */

export interface IdleTrigger {
  /** Report activity (a resource fetch); (re)arms the quiet window. */
  activity(): void;
  cancel(): void;
}

export function createIdleTrigger(idleMs: number, fire: () => void): IdleTrigger {
  let timer: ReturnType<typeof setTimeout> | null = null;
  let finished = false;

  const arm = () => {
    if (finished) {
      return;
    }
    if (timer !== null) {
      clearTimeout(timer);
    }
    timer = setTimeout(() => {
      finished = true;
      fire();
    }, idleMs);
  };

  arm();
  return {
    activity: arm,
    cancel: () => {
      finished = true;
      if (timer !== null) {
        clearTimeout(timer);
      }
    },
  };
}
