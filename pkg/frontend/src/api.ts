// Typed client for the query service's JSON endpoints.
//
// All server interaction goes through the two documented endpoints,
// GET /api/query and GET /api/health. The transport is injectable so
// tests can exercise the full request path without a server.

export interface RankedResult {
  rank: number;
  score: number;
  component: string[];
  signature: string;
  description: string;
  source_url: string;
}

export interface HealthInfo {
  status: string;
  project: string;
  pairs: number;
}

/** The slice of a fetch Response the client actually consumes. */
export interface TransportResponse {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type Transport = (url: string) => Promise<TransportResponse>;

export const fetchTransport: Transport = (url) => fetch(url);

/** Raised for non-2xx responses, carrying the server's error message. */
export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = 'ApiError';
  }
}

async function errorMessage(response: TransportResponse): Promise<string> {
  try {
    const body = (await response.json()) as { error?: unknown };
    if (body && typeof body.error === 'string' && body.error) {
      return body.error;
    }
  } catch {
    // non-JSON error body; fall through to the generic message
  }
  return `server error (status ${response.status})`;
}

export async function queryApi(
  transport: Transport,
  query: string,
  k: number,
): Promise<RankedResult[]> {
  const params = new URLSearchParams({ q: query, k: String(k) });
  const response = await transport(`/api/query?${params.toString()}`);
  if (!response.ok) {
    throw new ApiError(response.status, await errorMessage(response));
  }
  return (await response.json()) as RankedResult[];
}

export async function healthApi(transport: Transport): Promise<HealthInfo> {
  const response = await transport('/api/health');
  if (!response.ok) {
    throw new ApiError(response.status, await errorMessage(response));
  }
  return (await response.json()) as HealthInfo;
}
