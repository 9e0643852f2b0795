// Client-side mirrors of the service JSON. Every number shown in the UI
// comes from one of these payloads; the client computes layout only.

export interface SourceContext {
  source_id: string;
  raw_text: string;
  span: [number, number] | null;
}

export interface SuggestionView {
  id: string;
  kind: "criterion_to_concept" | "concept_merge";
  subject_id: string;
  subject_label: string;
  target_id: string;
  target_label: string;
  score: number;
  rank: number;
  source: SourceContext | null;
}

export interface SuggestionBatch {
  journal_seq: number;
  suggestions: SuggestionView[];
}

export interface VariableScoreView {
  id: string;
  label: string;
  influence: number;
  dependence: number;
  quadrant: "driver" | "relay" | "dependent" | "autonomous";
  is_key: boolean;
}

export interface ScoresView {
  variables: VariableScoreView[];
  k_used: number;
  converged: boolean;
  medians: { influence: number; dependence: number };
}

export interface QuestionnaireOptionView {
  id: string;
  label: string;
  modalities: string[];
}

export interface QuestionnaireView {
  round: number;
  k: number;
  prior_ranking: string[];
  variables: QuestionnaireOptionView[];
}

export interface RankingView {
  round: number;
  k: number;
  counts: Record<string, number>;
  ranking: string[];
  rejected: { respondent_id: string; reason: string }[];
  valid_ballots: number;
  total_ballots: number;
  response_rate: number;
}

export interface AttitudesView {
  alternative_id: string;
  stakeholders: string[];
  scopes: { scope: string; label: string }[];
  cells: Record<string, Record<string, number>>;
}

export interface MutationResult {
  seq: number;
}

export interface ApiFailure {
  status: number; // 0 means the network request itself failed
  type: string;
  detail: string;
}

export function isApiFailure(value: unknown): value is ApiFailure {
  return (
    typeof value === "object" &&
    value !== null &&
    "status" in value &&
    "detail" in value
  );
}
