/**
 * DOM construction for the explainable warning page. Pure: takes a
 * Document and a payload, builds the page, wires the two actions. The
 * "Proceed anyway" action is friction-guarded — it first reveals a
 * confirmation section whose final button stays disabled until the risk
 * acknowledgement is checked.
 */

import { buildLegend } from "./legend.js";
import type { WarningPayload } from "./types.js";

export interface WarningActions {
  onBack(): void;
  onProceed(): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function renderWarningPage(
  doc: Document,
  root: HTMLElement,
  payload: WarningPayload,
  actions: WarningActions,
): void {
  root.textContent = "";

  const header = el(doc, "header", "warning-header");
  header.appendChild(el(doc, "h1", "warning-title", "Suspected phishing page"));
  const urlLine = el(doc, "p", "warning-url");
  urlLine.appendChild(el(doc, "span", "warning-url-label", "Blocked page: "));
  urlLine.appendChild(el(doc, "code", "warning-url-value", payload.url));
  header.appendChild(urlLine);
  root.appendChild(header);

  const shot = el(doc, "img", "warning-screenshot") as HTMLImageElement;
  shot.src = `data:image/png;base64,${payload.screenshot.png_base64}`;
  shot.width = payload.screenshot.width;
  shot.height = payload.screenshot.height;
  shot.alt = "Annotated screenshot of the suspicious page";
  root.appendChild(shot);

  const legend = el(doc, "ul", "legend");
  for (const row of buildLegend(payload)) {
    const item = el(doc, "li", "legend-row");
    const swatch = el(doc, "span", "legend-swatch");
    swatch.style.backgroundColor = row.color;
    swatch.dataset.color = row.color;
    item.appendChild(swatch);
    const body = el(doc, "div", "legend-body");
    body.appendChild(el(doc, "strong", "legend-name", row.name));
    body.appendChild(el(doc, "p", "legend-explanation", row.explanation));
    if (row.artifacts.length > 0) {
      const quotes = el(doc, "ul", "legend-artifacts");
      for (const artifact of row.artifacts) {
        quotes.appendChild(el(doc, "li", "legend-artifact", artifact));
      }
      body.appendChild(quotes);
    }
    item.appendChild(body);
    legend.appendChild(item);
  }
  root.appendChild(legend);

  const controls = el(doc, "div", "warning-actions");
  const back = el(doc, "button", "action-back", "Back to safety");
  back.id = "back";
  back.addEventListener("click", () => actions.onBack());
  controls.appendChild(back);

  const proceed = el(doc, "button", "action-proceed", "Proceed anyway");
  proceed.id = "proceed";
  controls.appendChild(proceed);
  root.appendChild(controls);

  const confirm = el(doc, "div", "proceed-confirm");
  confirm.id = "proceed-confirm";
  confirm.hidden = true;
  const ack = el(doc, "input") as HTMLInputElement;
  ack.type = "checkbox";
  ack.id = "proceed-ack";
  const ackLabel = el(
    doc,
    "label",
    "proceed-ack-label",
    "I understand this page shows signs of phishing and may steal what I enter",
  );
  ackLabel.htmlFor = ack.id;
  const go = el(doc, "button", "action-proceed-final", "Take me there") as HTMLButtonElement;
  go.id = "proceed-final";
  go.disabled = true;
  confirm.appendChild(ack);
  confirm.appendChild(ackLabel);
  confirm.appendChild(go);
  root.appendChild(confirm);

  proceed.addEventListener("click", () => {
    confirm.hidden = false;
  });
  ack.addEventListener("change", () => {
    go.disabled = !ack.checked;
  });
  go.addEventListener("click", () => {
    if (ack.checked) {
      actions.onProceed();
    }
  });
}
