import type {
  ApiFailure,
  AttitudesView,
  MutationResult,
  QuestionnaireView,
  RankingView,
  ScoresView,
  SuggestionBatch,
} from "./types.js";

/** Everything the views may call. Tests substitute a fake implementation. */
export interface Api {
  suggestions(threshold?: string, limit?: number): Promise<SuggestionBatch>;
  acceptSuggestion(id: string, seq: number): Promise<MutationResult>;
  rejectSuggestion(id: string, seq: number): Promise<MutationResult>;
  scores(): Promise<ScoresView>;
  questionnaire(round?: number): Promise<QuestionnaireView>;
  submitBallot(respondent: string, round: number, picks: string[]): Promise<MutationResult>;
  ranking(round?: number): Promise<RankingView>;
  attitudes(): Promise<AttitudesView>;
}

export interface SessionOptions {
  baseUrl?: string;
  actor?: string;
  role?: "facilitator" | "stakeholder";
}

async function asFailure(response: Response): Promise<ApiFailure> {
  try {
    const body = await response.json();
    if (body && body.error) {
      return {
        status: response.status,
        type: String(body.error.type ?? "Error"),
        detail: String(body.error.detail ?? response.statusText),
      };
    }
    return {
      status: response.status,
      type: "Error",
      detail: JSON.stringify(body),
    };
  } catch {
    return { status: response.status, type: "Error", detail: response.statusText };
  }
}

export class HttpApi implements Api {
  private base: string;
  private headers: Record<string, string>;

  constructor(options: SessionOptions = {}) {
    this.base = options.baseUrl ?? "";
    this.headers = {
      "Content-Type": "application/json",
      "X-Actor": options.actor ?? "webui",
      "X-Role": options.role ?? "facilitator",
    };
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.base + path, { headers: this.headers, ...init });
    } catch (err) {
      throw {
        status: 0,
        type: "NetworkError",
        detail: err instanceof Error ? err.message : String(err),
      } satisfies ApiFailure;
    }
    if (!response.ok) {
      throw await asFailure(response);
    }
    return (await response.json()) as T;
  }

  suggestions(threshold?: string, limit = 20): Promise<SuggestionBatch> {
    const query = new URLSearchParams();
    if (threshold) query.set("threshold", threshold);
    query.set("limit", String(limit));
    return this.request(`/suggestions?${query}`);
  }

  acceptSuggestion(id: string, seq: number): Promise<MutationResult> {
    return this.request(`/suggestions/${id}/accept`, {
      method: "POST",
      body: JSON.stringify({ seq }),
    });
  }

  rejectSuggestion(id: string, seq: number): Promise<MutationResult> {
    return this.request(`/suggestions/${id}/reject`, {
      method: "POST",
      body: JSON.stringify({ seq }),
    });
  }

  scores(): Promise<ScoresView> {
    return this.request("/scores");
  }

  questionnaire(round = 1): Promise<QuestionnaireView> {
    return this.request(`/delphi/questionnaire?round=${round}`);
  }

  submitBallot(respondent: string, round: number, picks: string[]): Promise<MutationResult> {
    return this.request("/ballots", {
      method: "POST",
      body: JSON.stringify({
        respondent_id: respondent,
        round,
        chosen_variable_ids: picks,
      }),
    });
  }

  ranking(round = 1): Promise<RankingView> {
    return this.request(`/delphi/ranking?round=${round}`);
  }

  attitudes(): Promise<AttitudesView> {
    return this.request("/attitudes");
  }
}
