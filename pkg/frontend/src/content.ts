// Content script. Runs as a classic (non-module) script, so it cannot
// import anything; the network-idle logic here mirrors src/idle.ts.
//
// One snapshot per page view: after the load event, wait until no
// resource has been fetched for 500 ms, then serialize the DOM as
// rendered (script-inserted content included) and hand it to the
// background, which keeps only the most recent snapshot per tab.

(() => {
  const IDLE_MS = 500;
  let timer: number | undefined;
  let finished = false;

  const serialize = (): string => {
    const doctype = document.doctype
      ? `<!DOCTYPE ${document.doctype.name}>\n`
      : "";
    return doctype + document.documentElement.outerHTML;
  };

  const capture = () => {
    if (finished) {
      return;
    }
    finished = true;
    try {
      chrome.runtime.sendMessage({
        kind: "pxp-snapshot",
        url: window.location.href,
        html: serialize(),
      });
    } catch {
      // Extension got reloaded underneath us; the next navigation recovers.
    }
  };

  const arm = () => {
    if (finished) {
      return;
    }
    if (timer !== undefined) {
      window.clearTimeout(timer);
    }
    timer = window.setTimeout(capture, IDLE_MS);
  };

  const start = () => {
    arm();
    try {
      const observer = new PerformanceObserver(() => arm());
      observer.observe({ entryTypes: ["resource"] });
      window.setTimeout(() => observer.disconnect(), 30_000);
    } catch {
      // No PerformanceObserver: the plain load + 500 ms timer still holds.
    }
  };

  if (document.readyState === "complete") {
    start();
  } else {
    window.addEventListener("load", start, { once: true });
  }
})();
