// Console controller: state + gateway calls + rendering, no DOM knowledge.
// Authorization outcomes (URL vs rejection, payload vs denial, GRANTED vs
// REJECTED rows) are pure echoes of gateway responses.

import { GatewayClient, GatewayError } from "./api.js";
import type { EventRow, FetchResponse, RecordResponse, RequestResponse,
  SessionResponse } from "./types.js";
import {
  Banner,
  bannerHtml,
  eventLogView,
  fetchResultView,
  headerView,
  loginView,
  patientListView,
  readingsComposerView,
  requestResultView,
  retrievalFormView,
} from "./views.js";

// substituted when a patient submits an empty policy: a policy with no
// rules never permits, so the record stays locked until re-finalized
export const DEFAULT_DENY_POLICY = "policy default-deny {\n  deny-overrides\n}\n";

export interface ConsoleOptions {
  pollIntervalMs?: number;
}

export class Console {
  session: SessionResponse | null = null;
  events: EventRow[] = [];
  banner: Banner | null = null;
  lastRequest: RequestResponse | null = null;
  lastRecord: RecordResponse | null = null;
  fetchView: { result: FetchResponse; text: string | null } | null = null;
  pendingLines: string[] = [];
  readonly pollIntervalMs: number;
  private seenEventIds = new Set<string>();
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly client: GatewayClient,
    private readonly sink: (html: string) => void,
    options: ConsoleOptions = {},
  ) {
    this.pollIntervalMs = options.pollIntervalMs ?? 2000;
  }

  render(): void {
    this.sink(this.html());
  }

  html(): string {
    if (!this.session) return loginView(this.banner);
    if (this.fetchView) {
      return headerView(this.session)
        + bannerHtml(this.banner)
        + fetchResultView(this.fetchView.result, this.fetchView.text);
    }
    const parts = [headerView(this.session), bannerHtml(this.banner)];
    if (this.session.kind === "Doctor") {
      parts.push(patientListView(this.session.patients ?? []));
    } else {
      parts.push(readingsComposerView(this.pendingLines, this.lastRecord));
      parts.push(`<section class="card" id="own-retrieval">
  <h2>Retrieve an EHR</h2>${retrievalFormView()}</section>`);
    }
    parts.push(requestResultView(this.lastRequest));
    parts.push(eventLogView(this.events));
    return parts.join("\n");
  }

  // -- session -------------------------------------------------------------

  async login(participantId: string, credentialId: string): Promise<void> {
    this.banner = null;
    try {
      this.session = await this.client.login(participantId, credentialId);
    } catch (error) {
      this.session = null;
      this.banner = { tone: "error", text: messageOf(error) };
      this.render();
      return;
    }
    this.events = [];
    this.seenEventIds.clear();
    await this.pollEvents();
    this.render();
  }

  logout(): void {
    this.stopPolling();
    this.session = null;
    this.events = [];
    this.seenEventIds.clear();
    this.banner = null;
    this.lastRequest = null;
    this.lastRecord = null;
    this.fetchView = null;
    this.pendingLines = [];
    this.render();
  }

  // -- doctor flow -----------------------------------------------------------

  async submitRequest(targetPatientId: string): Promise<void> {
    if (!this.session) return;
    this.banner = null;
    try {
      this.lastRequest = await this.client.requestEhr(this.session.sessionId,
        targetPatientId);
    } catch (error) {
      this.lastRequest = null;
      this.banner = { tone: "error", text: messageOf(error) };
    }
    await this.pollEvents();
    this.render();
  }

  async openUrl(url: string): Promise<void> {
    if (!this.session) return;
    this.banner = null;
    try {
      const result = await this.client.fetchEhr(this.session.sessionId, url);
      this.fetchView = { result, text: decodePayload(result) };
    } catch (error) {
      this.fetchView = null;
      this.banner = { tone: "error", text: messageOf(error) };
    }
    this.render();
  }

  closeFetch(): void {
    this.fetchView = null;
    this.render();
  }

  // -- patient flow -----------------------------------------------------------

  async addReading(parameter: string, value: number, unit: string): Promise<void> {
    if (!this.session) return;
    this.banner = null;
    try {
      const response = await this.client.addReading(this.session.sessionId,
        this.session.participantId, parameter, value, unit);
      this.pendingLines.push(response.line);
    } catch (error) {
      this.banner = { tone: "error", text: messageOf(error) };
    }
    this.render();
  }

  async authorPolicy(policyText: string): Promise<void> {
    if (!this.session) return;
    this.banner = null;
    let policy = policyText;
    if (policyText.trim() === "") {
      policy = DEFAULT_DENY_POLICY;
      this.banner = {
        tone: "warning",
        text: "Empty policy accepted as default-deny: nobody can read this "
          + "record until you grant access.",
      };
    }
    try {
      this.lastRecord = await this.client.finalizeRecord(this.session.sessionId,
        policy);
      this.pendingLines = [];
    } catch (error) {
      this.lastRecord = null;
      this.banner = { tone: "error", text: messageOf(error) };
    }
    this.render();
  }

  // -- event log ---------------------------------------------------------------

  async pollEvents(): Promise<void> {
    if (!this.session) return;
    const filter = this.session.kind === "Doctor"
      ? { requesterId: this.session.participantId }
      : { targetPatientId: this.session.participantId };
    let incoming: EventRow[];
    try {
      incoming = (await this.client.events(this.session.sessionId, filter)).events;
    } catch {
      return; // keep showing what we have; next poll retries
    }
    // append-only merge: existing rows are never reordered or dropped
    for (const row of incoming) {
      if (!this.seenEventIds.has(row.eventId)) {
        this.seenEventIds.add(row.eventId);
        this.events.push(row);
      }
    }
  }

  startPolling(): void {
    this.stopPolling();
    this.timer = setInterval(async () => {
      const before = this.events.length;
      await this.pollEvents();
      if (this.events.length !== before) this.render();
    }, this.pollIntervalMs);
  }

  stopPolling(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}

function messageOf(error: unknown): string {
  if (error instanceof GatewayError) return error.message;
  return error instanceof Error ? error.message : String(error);
}

function decodePayload(result: FetchResponse): string | null {
  if (!result.contentType.startsWith("text/")) return null;
  const raw = atob(result.payloadBase64);
  const bytes = Uint8Array.from(raw, (ch) => ch.charCodeAt(0));
  return new TextDecoder().decode(bytes);
}
