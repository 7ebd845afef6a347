// Wire types, mirroring the gateway's JSON responses exactly.

export interface PatientRow {
  id: string;
  firstName: string;
  lastName: string;
}

export interface SessionResponse {
  sessionId: string;
  participantId: string;
  kind: "Patient" | "Doctor";
  displayName: string;
  patients?: PatientRow[];
}

export interface EventRow {
  eventId: string;
  timestampMs: number;
  requesterId: string;
  targetPatientId: string;
  outcome: "GRANTED" | "REJECTED";
  detail: string;
}

export interface ReadingResponse {
  ok: boolean;
  line: string;
}

export interface RecordResponse {
  recordRef: string;
  digestHex: string;
  assetId: string;
}

export interface RequestResponse {
  url: string;
  eventId: string;
  targetPatientId: string;
}

export interface FetchResponse {
  payloadBase64: string;
  contentType: string;
  digestHex: string;
  verdict: "MATCH" | "TAMPERED";
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
