/**
 * Typed client for the survey HTTP API.
 *
 * Open-session payloads intentionally carry no ground truth; the shapes here
 * mirror that, so the compiler itself documents that labels only exist in
 * the result payload of a completed session.
 */

export type Choice = "real" | "fake";

export interface QuizItemRef {
  item_id: string;
  image_url: string;
}

export interface SessionStart {
  session_id: string;
  items: QuizItemRef[];
}

export interface AnswerAck {
  answered: number;
  remaining: number;
}

export interface ResultItem {
  item_id: string;
  image_url: string;
  chosen: Choice;
  truth: Choice;
  correct: boolean;
}

export interface SessionResult {
  session_id: string;
  accuracy: number;
  items: ResultItem[];
}

/** Error carrying the HTTP status so the UI can branch on 409/404. */
export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (err) {
    throw new ApiError(0, `backend unreachable: ${String(err)}`);
  }
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      /* non-JSON error body; keep the status text */
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

/** What the quiz needs from the backend; QuizApp is written against this so
 * tests can substitute stubs. */
export interface SurveyClient {
  resolve(path: string): string;
  startSession(): Promise<SessionStart>;
  submitAnswer(sessionId: string, itemId: string, choice: Choice): Promise<AnswerAck>;
  fetchResult(sessionId: string): Promise<SessionResult>;
}

export class SurveyApi implements SurveyClient {
  constructor(private readonly baseUrl: string = "") {}

  resolve(path: string): string {
    return this.baseUrl + path;
  }

  startSession(): Promise<SessionStart> {
    return request<SessionStart>(this.resolve("/api/session"), { method: "POST" });
  }

  submitAnswer(sessionId: string, itemId: string, choice: Choice): Promise<AnswerAck> {
    return request<AnswerAck>(this.resolve(`/api/session/${sessionId}/answer`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ item_id: itemId, choice }),
    });
  }

  fetchResult(sessionId: string): Promise<SessionResult> {
    return request<SessionResult>(this.resolve(`/api/session/${sessionId}/result`));
  }
}
