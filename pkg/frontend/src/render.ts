// Pure view: PanelState in, HTML string out. No DOM access, no stored
// state, so the same state always renders the same markup.

import type { PanelState, ScoredRow } from "./panel.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function feedbackCell(row: ScoredRow): string {
  switch (row.feedback) {
    case "Accepted":
      return `<span class="verdict accepted">Accepted</span>`;
    case "Ignored":
      return `<span class="verdict ignored">Ignored (high confidence)</span>`;
    case "Sent":
      return `<span class="verdict sent">sending&hellip;</span>`;
    case "None":
      if (row.error !== null) return "";
      return (
        `<button class="flag" data-user="${escapeHtml(row.userId)}">` +
        `&#128078; wrong label</button>`
      );
  }
}

function rowHtml(row: ScoredRow): string {
  const user = escapeHtml(row.userId);
  if (row.error !== null) {
    return (
      `<tr class="error-row"><td>${user}</td>` +
      `<td colspan="2" class="inline-error">${escapeHtml(row.error)}</td>` +
      `<td></td></tr>`
    );
  }
  const label = row.label ?? "";
  const confidence = row.confidence === null ? "" : row.confidence.toFixed(2);
  const notice =
    row.notice === null
      ? ""
      : ` <span class="notice">${escapeHtml(row.notice)}</span>`;
  return (
    `<tr><td>${user}</td>` +
    `<td><span class="badge ${escapeHtml(label)}">${escapeHtml(label)}</span></td>` +
    `<td>${confidence}</td>` +
    `<td>${feedbackCell(row)}${notice}</td></tr>`
  );
}

export function render(state: PanelState): string {
  const parts: string[] = [];
  if (state.banner !== null) {
    parts.push(`<div class="banner offline">${escapeHtml(state.banner)}</div>`);
  }
  if (state.validation !== null) {
    parts.push(`<p class="validation">${escapeHtml(state.validation)}</p>`);
  }
  if (state.info !== null) {
    parts.push(`<p class="info">${escapeHtml(state.info)}</p>`);
  }
  if (state.busy) {
    parts.push(`<p class="busy">scoring&hellip;</p>`);
  }
  if (state.rows.length > 0) {
    parts.push(
      `<table class="scores"><thead><tr>` +
        `<th>retweeter</th><th>label</th><th>confidence</th><th>feedback</th>` +
        `</tr></thead><tbody>` +
        state.rows.map(rowHtml).join("") +
        `</tbody></table>`,
    );
  }
  if (state.modelVersion !== null) {
    parts.push(`<p class="model">model version ${state.modelVersion}</p>`);
  }
  return parts.join("\n");
}
