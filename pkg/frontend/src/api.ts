// Gateway API client. Every HTTP call the console makes goes through this
// class, and the fetch function is injectable so tests can intercept all of
// them. The console never decides anything itself: it renders what these
// calls return.

import type {
  EventRow,
  FetchResponse,
  ReadingResponse,
  RecordResponse,
  RequestResponse,
  SessionResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class GatewayError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<GatewayError> {
  try {
    const body = await response.json();
    return new GatewayError(body.code ?? "Error", body.message ?? response.statusText,
      response.status);
  } catch {
    return new GatewayError("Error", response.statusText, response.status);
  }
}

export class GatewayClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => globalThis.fetch(input, init),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) throw await parseError(response);
    return response.json() as Promise<T>;
  }

  private async get<T>(path: string, params: Record<string, string>): Promise<T> {
    const query = new URLSearchParams(params).toString();
    const response = await this.fetchFn(`${this.baseUrl}${path}?${query}`);
    if (!response.ok) throw await parseError(response);
    return response.json() as Promise<T>;
  }

  login(participantId: string, credentialId: string): Promise<SessionResponse> {
    return this.post("/sessions", { participantId, credentialId });
  }

  addReading(sessionId: string, patientId: string, parameter: string,
             value: number, unit: string): Promise<ReadingResponse> {
    return this.post("/readings", { sessionId, patientId, parameter, value, unit });
  }

  finalizeRecord(sessionId: string, policy: string): Promise<RecordResponse> {
    return this.post("/records", { sessionId, policy });
  }

  requestEhr(sessionId: string, targetPatientId: string): Promise<RequestResponse> {
    return this.post("/requests", { sessionId, targetPatientId });
  }

  fetchEhr(sessionId: string, url: string): Promise<FetchResponse> {
    return this.get("/fetch", { sessionId, url });
  }

  events(sessionId: string,
         filter: { requesterId?: string; targetPatientId?: string } = {},
  ): Promise<{ events: EventRow[] }> {
    return this.get("/events", { sessionId, ...filter });
  }
}
