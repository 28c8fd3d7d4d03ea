import type { BugSummary, SelectResult, SessionView } from "./types.js";

export class ApiError extends Error {
  constructor(
    public code: string,
    message: string,
    public status: number,
  ) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (err) {
    throw new ApiError("NetworkError", String(err), 0);
  }
  const body = await response.json().catch(() => null);
  if (!response.ok) {
    const code = body && typeof body.code === "string" ? body.code : "HttpError";
    const message = body && typeof body.message === "string" ? body.message : response.statusText;
    throw new ApiError(code, message, response.status);
  }
  return body as T;
}

function post(body: unknown): RequestInit {
  return {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  };
}

export class SessionApi {
  constructor(private base: string = "") {}

  listBugs(): Promise<{ bugs: BugSummary[] }> {
    return request(`${this.base}/bugs`);
  }

  createSession(bugId: string): Promise<SessionView> {
    return request(`${this.base}/sessions`, post({ bug_id: bugId }));
  }

  getSession(sessionId: string): Promise<SessionView> {
    return request(`${this.base}/sessions/${sessionId}`);
  }

  explore(sessionId: string, clusterId: string): Promise<SessionView> {
    return request(`${this.base}/sessions/${sessionId}/explore`, post({ cluster_id: clusterId }));
  }

  exclude(sessionId: string, clusterId: string): Promise<SessionView> {
    return request(`${this.base}/sessions/${sessionId}/exclude`, post({ cluster_id: clusterId }));
  }

  select(sessionId: string, patchId: string): Promise<SelectResult> {
    return request(`${this.base}/sessions/${sessionId}/select`, post({ patch_id: patchId }));
  }
}
