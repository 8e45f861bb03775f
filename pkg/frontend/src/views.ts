// Render functions: data in, HTML string out. No state, no fetches; the
// app swaps the result into the page and wires events by delegation.

import type {
    Annotation,
    CaseDetail,
    CaseSummary,
    ClusterCard,
    ClusterResponse,
    RequestsResponse,
} from "./api.js";

// The only two roles an annotation may carry. The selector is built from
// this list, so nothing else can be submitted through the form.
export const ANNOTATION_ROLES = ["perpetrator", "victim"] as const;

export const LINK_LEVELS = ["address", "entity", "collector"] as const;

export function escapeHtml(text: string): string {
    return text
        .replace(/&/g, "&amp;")
        .replace(/</g, "&lt;")
        .replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;");
}

export function formatSatoshi(satoshi: number): string {
    const btc = (satoshi / 1e8).toFixed(8).replace(/0+$/, "").replace(/\.$/, "");
    return `${btc || "0"} BTC`;
}

function caseLink(caseId: string): string {
    return `<a href="#/cases/${escapeHtml(caseId)}" data-case-link="${escapeHtml(caseId)}">${escapeHtml(caseId)}</a>`;
}

// -- chrome ------------------------------------------------------------

export function renderShell(): string {
    return `
<header class="topbar">
  <span class="brand">caseconnect</span>
  <nav>
    <a href="#/cases">cases</a>
    <a href="#/clusters">clusters</a>
    <a href="#/network">network</a>
    <a href="#/requests">requests</a>
  </nav>
  <button data-action="signout">sign out</button>
</header>
<div id="banner"></div>
<main id="view"></main>`;
}

export function renderLogin(error?: string): string {
    return `
<form id="login" class="card">
  <h1>caseconnect</h1>
  <label>service URL <input name="baseUrl" value="http://127.0.0.1:8400" required></label>
  <label>access token <input name="token" type="password" required></label>
  ${error ? `<p class="form-error">${escapeHtml(error)}</p>` : ""}
  <button type="submit">sign in</button>
</form>`;
}

export function renderStaleBanner(): string {
    return `
<div class="stale-banner" role="status">
  clustering stale — <button data-action="relink">relink</button>
</div>`;
}

export function renderError(message: string): string {
    return `<p class="error">${escapeHtml(message)}</p>`;
}

// -- cases ---------------------------------------------------------------

export function renderCaseList(cases: CaseSummary[]): string {
    if (cases.length === 0) {
        return `${newCaseForm()}<p class="empty">No cases filed in your zone yet.</p>`;
    }
    const rows = cases
        .map(
            (c) => `
    <tr>
      <td>${caseLink(c.case_id)}</td>
      <td>${escapeHtml(c.category)}</td>
      <td>${escapeHtml(c.zone_id)}</td>
      <td class="num">${c.annotation_count}</td>
    </tr>`,
        )
        .join("");
    return `${newCaseForm()}
<table class="cases">
  <thead><tr><th>file number</th><th>category</th><th>zone</th><th>annotations</th></tr></thead>
  <tbody>${rows}</tbody>
</table>`;
}

function newCaseForm(error?: string): string {
    return `
<form id="new-case" class="card">
  <input name="case_id" placeholder="BY1234-010123-22/6" required>
  <select name="category">
    <option value="sextortion">sextortion</option>
    <option value="cyberfraud">cyberfraud</option>
  </select>
  ${error ? `<p class="form-error">${escapeHtml(error)}</p>` : ""}
  <button type="submit">file case</button>
</form>`;
}

export function renderNewCaseError(message: string): string {
    return `<p class="form-error">${escapeHtml(message)}</p>`;
}

export function renderCaseDetail(detail: CaseDetail): string {
    return `
<article class="case-detail" data-case-id="${escapeHtml(detail.case_id)}">
  <h1>${escapeHtml(detail.case_id)}</h1>
  <p>${escapeHtml(detail.category)} · zone ${escapeHtml(detail.zone_id)}</p>
  <table class="annotations">
    <thead><tr><th>address</th><th>role</th><th>author</th></tr></thead>
    <tbody id="annotation-rows">${detail.annotations.map(renderAnnotationRow).join("")}</tbody>
  </table>
  ${annotationForm()}
</article>`;
}

export function renderAnnotationRow(annotation: Annotation): string {
    return `
<tr data-address="${escapeHtml(annotation.address)}">
  <td class="addr">${escapeHtml(annotation.address)}</td>
  <td>${escapeHtml(annotation.role)}</td>
  <td>${escapeHtml(annotation.author)}</td>
</tr>`;
}

function annotationForm(): string {
    const options = ANNOTATION_ROLES.map((role) => `<option value="${role}">${role}</option>`).join("");
    return `
<form id="annotate" class="card">
  <input name="address" placeholder="address" required>
  <select name="role">${options}</select>
  <div id="annotate-error"></div>
  <button type="submit">annotate</button>
</form>`;
}

// -- clusters -------------------------------------------------------------

export function renderLevelSelector(active: string): string {
    const options = LINK_LEVELS.map(
        (level) =>
            `<option value="${level}"${level === active ? " selected" : ""}>${level}</option>`,
    ).join("");
    return `<label class="level">evidence level <select data-action="level">${options}</select></label>`;
}

export function renderClusterCard(cluster: ClusterCard): string {
    const members = cluster.case_ids.map((id) => `<li>${caseLink(id)}</li>`).join("");
    const stubs =
        cluster.hidden_count > 0
            ? `<p class="stub">${cluster.hidden_count} linked case${cluster.hidden_count === 1 ? "" : "s"} not visible to your zone</p>`
            : "";
    const badge = cluster.contains_service_evidence
        ? `<span class="badge service">service evidence</span>`
        : "";
    return `
<section class="cluster-card" data-size="${cluster.size}">
  <header>${cluster.size} case${cluster.size === 1 ? "" : "s"} ${badge}</header>
  <p class="inflow">inflow ${formatSatoshi(cluster.inflow_satoshi)}</p>
  <ul class="members">${members}</ul>
  ${stubs}
</section>`;
}

export function renderClusterView(response: ClusterResponse): string {
    const cards = response.clusters.map(renderClusterCard).join("");
    const body = cards || `<p class="empty">No case clusters at this level.</p>`;
    return `${renderLevelSelector(response.level)}<div id="cluster-cards">${body}</div>`;
}

// -- exchange requests ------------------------------------------------------

export function renderRequestsPanel(result?: RequestsResponse, error?: string): string {
    let body = "";
    if (result) {
        const rows = result.requests
            .map(
                (r) => `
      <tr><td>${escapeHtml(r.exchange)}</td><td>${escapeHtml(r.zone_id)}</td></tr>`,
            )
            .join("");
        const elsewhere = result.requested_elsewhere
            ? `<p class="stub">another zone already requested data for this address</p>`
            : "";
        body = `
  <h2>${escapeHtml(result.address)}</h2>
  ${elsewhere}
  ${rows ? `<table class="requests"><thead><tr><th>exchange</th><th>zone</th></tr></thead><tbody>${rows}</tbody></table>` : `<p class="empty">No requests from your zone.</p>`}
  <form id="log-request" class="card" data-address="${escapeHtml(result.address)}">
    <input name="exchange" placeholder="exchange name" required>
    <button type="submit">log request</button>
  </form>`;
    }
    return `
<form id="lookup-request" class="card">
  <input name="address" placeholder="address" value="${result ? escapeHtml(result.address) : ""}" required>
  <button type="submit">check</button>
</form>
${error ? `<p class="form-error">${escapeHtml(error)}</p>` : ""}
<div id="request-result">${body}</div>`;
}
