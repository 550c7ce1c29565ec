/** Placeholder page: shown while the explanation is being generated. */

function tabIdFromQuery(): number | null {
  const raw = new URLSearchParams(window.location.search).get("tab");
  const parsed = raw === null ? NaN : Number.parseInt(raw, 10);
  return Number.isInteger(parsed) ? parsed : null;
}

const back = document.getElementById("back");
const tabId = tabIdFromQuery();
if (back && tabId !== null) {
  back.addEventListener("click", () => {
    void chrome.runtime.sendMessage({ kind: "pxp-back", tabId });
  });
}
