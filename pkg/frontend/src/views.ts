// Pure HTML renderers. Every row and banner shows gateway response data
// verbatim (escaped); nothing here computes an allow/deny outcome.

import type { EventRow, FetchResponse, PatientRow, RecordResponse,
  RequestResponse, SessionResponse } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export interface Banner {
  tone: "error" | "warning" | "success";
  text: string;
}

export function bannerHtml(banner: Banner | null): string {
  if (!banner) return "";
  return `<div class="banner banner-${banner.tone}">${escapeHtml(banner.text)}</div>`;
}

export function loginView(banner: Banner | null): string {
  return `
<section class="card" id="login-card">
  <h1>EHR network login</h1>
  ${bannerHtml(banner)}
  <form data-action="login">
    <label>Participant ID <input name="participantId" required></label>
    <label>ID card (credential) <input name="credentialId" type="password" required></label>
    <button type="submit">Log in</button>
  </form>
</section>`;
}

export function patientListView(patients: PatientRow[]): string {
  const rows = patients.map((p) => `
    <tr>
      <td>${escapeHtml(p.id)}</td>
      <td>${escapeHtml(p.firstName)}</td>
      <td>${escapeHtml(p.lastName)}</td>
      <td><button data-action="request" data-patient-id="${escapeHtml(p.id)}">Retrieve EHR</button></td>
    </tr>`).join("");
  return `
<section class="card" id="patient-list">
  <h2>My patients</h2>
  <table>
    <thead><tr><th>ID</th><th>First name</th><th>Last name</th><th></th></tr></thead>
    <tbody>${rows}</tbody>
  </table>
  ${retrievalFormView()}
</section>`;
}

export function retrievalFormView(): string {
  return `
  <form data-action="request-by-id" id="retrieval-form">
    <label>Patient ID <input name="targetPatientId" required></label>
    <button type="submit">Submit retrieval request</button>
  </form>`;
}

export function requestResultView(result: RequestResponse | null): string {
  if (!result) return "";
  return `
<section class="card" id="request-result">
  <h2>One-time URL for patient ${escapeHtml(result.targetPatientId)}</h2>
  <code class="otu" id="otu-url">${escapeHtml(result.url)}</code>
  <button data-action="copy-url" data-url="${escapeHtml(result.url)}">Copy</button>
  <button data-action="open-url" data-url="${escapeHtml(result.url)}">Open</button>
  <p class="hint">This link self-destructs on first view (event ${escapeHtml(result.eventId)}).</p>
</section>`;
}

export function eventLogView(events: EventRow[]): string {
  const rows = events.map((e) => `
    <tr class="outcome-${e.outcome.toLowerCase()}">
      <td>${escapeHtml(e.eventId)}</td>
      <td>${new Date(e.timestampMs).toISOString()}</td>
      <td>${escapeHtml(e.requesterId)}</td>
      <td>${escapeHtml(e.targetPatientId)}</td>
      <td>${escapeHtml(e.outcome)}</td>
      <td>${escapeHtml(e.detail)}</td>
    </tr>`).join("");
  return `
<section class="card" id="event-log">
  <h2>Access events</h2>
  <table>
    <thead><tr><th>Event ID</th><th>Timestamp</th><th>Requester</th>
      <th>Patient</th><th>Outcome</th><th>Detail</th></tr></thead>
    <tbody>${rows}</tbody>
  </table>
</section>`;
}

export function readingsComposerView(lines: string[],
                                     record: RecordResponse | null): string {
  const pending = lines.length
    ? `<pre id="pending-lines">${escapeHtml(lines.join("\n"))}</pre>`
    : `<p class="hint">No pending readings.</p>`;
  const recorded = record ? `
  <div class="banner banner-success" id="record-confirmation">
    Record stored: ref ${escapeHtml(record.recordRef)}, digest ${escapeHtml(record.digestHex)}
  </div>` : "";
  return `
<section class="card" id="composer">
  <h2>My record</h2>
  ${pending}
  <form data-action="add-reading">
    <label>Parameter <input name="parameter" value="pulse"></label>
    <label>Value <input name="value" type="number" value="78"></label>
    <label>Unit <input name="unit" value="bpm"></label>
    <button type="submit">Add reading</button>
  </form>
  <form data-action="finalize">
    <label>Access policy
      <textarea name="policy" rows="8" placeholder="policy release { ... }"></textarea>
    </label>
    <button type="submit">Finalize &amp; register on chain</button>
  </form>
  ${recorded}
</section>`;
}

export function fetchResultView(result: FetchResponse, payloadText: string | null): string {
  const body = payloadText === null
    ? `<p class="hint">binary payload (${escapeHtml(result.contentType)})</p>`
    : `<pre id="fetched-payload">${escapeHtml(payloadText)}</pre>`;
  return `
<section class="card" id="fetch-view">
  <h2>Retrieved EHR data</h2>
  ${body}
  <dl>
    <dt>Digest (SHA3-256)</dt><dd><code>${escapeHtml(result.digestHex)}</code></dd>
    <dt>Integrity</dt>
    <dd class="verdict-${result.verdict.toLowerCase()}" id="verdict">${escapeHtml(result.verdict)}</dd>
  </dl>
  <button data-action="close-fetch">Back</button>
</section>`;
}

export function headerView(session: SessionResponse): string {
  return `
<header id="session-header">
  <span>${escapeHtml(session.displayName)}
    (${escapeHtml(session.participantId)}, ${escapeHtml(session.kind)})</span>
  <button data-action="logout">Log out</button>
</header>`;
}
