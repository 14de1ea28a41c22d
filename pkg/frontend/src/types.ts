/** Wire types for the percept scoring service (/v1). */

export interface ScoreResponse {
  statement_scores: Record<string, number>;
  profile: Record<string, number>;
  model_version: string;
  catalog_version: string;
}

export interface EngagementEstimate {
  prediction: number;
  interval: [number, number];
}

export interface CompareVariantResult {
  label: string;
  profile: Record<string, number>;
  statement_scores: Record<string, number>;
  predicted_engagement: Record<string, EngagementEstimate>;
}

export interface CompareDelta {
  label: string;
  baseline: string;
  profile_delta: Record<string, number>;
  engagement_delta: Record<string, number>;
}

export interface CompareResponse {
  variants: CompareVariantResult[];
  deltas: CompareDelta[];
}

export interface HealthResponse {
  status: string;
  model_loaded: boolean;
}
