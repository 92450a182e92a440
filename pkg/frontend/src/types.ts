/** Payload shapes mirrored from the /api/v1 surface. */

export interface TopicPayload {
  label: string;
  synonyms: string[];
  support: number;
  source: string;
}

export interface SentimentPayload {
  compound: number;
  positive_hits: number;
  negative_hits: number;
  stars: number;
}

export interface SuggestionPayload {
  topic: string;
  text: string;
  word_count: number;
  flags: string[];
  sentiment: SentimentPayload | null;
}

export interface CoveragePayload {
  covered: string[];
  unaddressed: string[];
  tags: [number, string[]][];
}

export interface FinalPayload {
  text: string;
  sentence_tags: [number, string[]][];
  sentiment: SentimentPayload;
  suggested_stars: number;
  topic_average_stars: number;
}

export type SessionState =
  | "CREATED"
  | "TOPICS_PRESENTED"
  | "RATED"
  | "PHRASES_SUGGESTED"
  | "DRAFTING"
  | "FINALIZED";

export interface SessionPayload {
  id: string;
  product_type: string;
  product_name: string | null;
  state: SessionState;
  presented_topics: TopicPayload[];
  provenance: string;
  ratings: { topic: string; stars: number }[];
  suggestions: SuggestionPayload[];
  draft: string;
  coverage: CoveragePayload;
  final: FinalPayload | null;
  notes: string[];
  seq: number;
}

export interface ApiError {
  code: string;
  message: string;
  detail?: string;
}
