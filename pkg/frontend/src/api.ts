// Typed client for the quiz HTTP API. Every server interaction in the
// app goes through this module; nothing else touches the network.

export interface SessionView {
  session_id: string;
  user_id: string;
  protocol: string;
  cursor: number;
  total: number;
  state: string;
}

export interface QuizItemView {
  item_id: string;
  protocol: string;
  video_url: string;
  // WL and SL carry five options; SL adds a context tag; MWIS carries
  // the sentence with the target word masked out. The correct answer
  // is never part of this payload.
  options?: string[];
  context_tag?: string;
  masked_text?: string;
}

export interface Progress {
  answered: number;
  total: number;
}

export interface Score {
  session_id: string;
  score: number;
  total: number;
}

export interface Attempt {
  item_id: string;
  submitted: string;
  correct: boolean;
  points: number;
  answered_at: string;
}

export type NextResponse =
  | { complete: false; progress: Progress; item: QuizItemView }
  | { complete: true; score: Score };

export interface AnswerResponse {
  attempt: Attempt;
  progress: Progress;
}

export interface CreateSessionRequest {
  user_id: string;
  protocol: string;
  dataset_tag: string;
  seed?: number;
}

export interface CreateSessionResponse {
  session: SessionView;
  items: QuizItemView[];
}

export class ApiError extends Error {
  status: number;
  code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class QuizApi {
  private base: string;
  private fetchImpl: FetchLike;

  constructor(base = "", fetchImpl?: FetchLike) {
    // Trailing slash would double up when joining paths.
    this.base = base.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  videoUrl(item: QuizItemView): string {
    return this.base + item.video_url;
  }

  createSession(req: CreateSessionRequest): Promise<CreateSessionResponse> {
    return this.request<CreateSessionResponse>("/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request<SessionView>(`/sessions/${encodeURIComponent(sessionId)}`);
  }

  nextItem(sessionId: string): Promise<NextResponse> {
    return this.request<NextResponse>(
      `/sessions/${encodeURIComponent(sessionId)}/next`,
    );
  }

  submitAnswer(
    sessionId: string,
    itemId: string,
    answer: string,
  ): Promise<AnswerResponse> {
    return this.request<AnswerResponse>(
      `/sessions/${encodeURIComponent(sessionId)}/answers`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ item_id: itemId, answer }),
      },
    );
  }

  getScore(sessionId: string): Promise<Score> {
    return this.request<Score>(
      `/sessions/${encodeURIComponent(sessionId)}/score`,
    );
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, "NetworkError", String(err));
    }
    if (!response.ok) {
      let code = "HttpError";
      let message = `${response.status} ${response.statusText}`;
      try {
        const body = await response.json();
        if (body && typeof body.code === "string") {
          code = body.code;
          message = typeof body.message === "string" ? body.message : message;
        }
      } catch {
        // Non-JSON error body; keep the status line.
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }
}
