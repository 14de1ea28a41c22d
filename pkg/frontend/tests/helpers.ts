import type { FetchLike } from "../src/api.js";
import type { CompareResponse, ScoreResponse } from "../src/types.js";

export const DIMENSIONS = [
  "Newsworthiness", "Understandability", "Expertise", "Importance", "Fun",
  "Surprisingness", "Controversy", "Exaggeration", "Interestingness",
  "Benefit", "Sharing", "Reading",
] as const;

/** Sentinel profile: distinctive values a client could never derive locally. */
export function sentinelProfile(offset = 0): Record<string, number> {
  const profile: Record<string, number> = {};
  DIMENSIONS.forEach((d, i) => {
    profile[d] = Math.round((1.13 + offset + i * 0.29) * 100) / 100;
  });
  return profile;
}

export function sentinelStatements(offset = 0): Record<string, number> {
  const out: Record<string, number> = {};
  for (let i = 0; i < 25; i++) {
    out[`statement_${String(i).padStart(2, "0")}`] = Math.round((1.05 + offset + i * 0.11) * 100) / 100;
  }
  return out;
}

export function scorePayload(offset = 0): ScoreResponse {
  return {
    statement_scores: sentinelStatements(offset),
    profile: sentinelProfile(offset),
    model_version: "mock-model",
    catalog_version: "1.0",
  };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

export interface MockService {
  fetch: FetchLike;
  calls: RecordedCall[];
}

/**
 * Mock of the scoring service. Score responses are independent of the text
 * by default (the sentinel payload), which is exactly what lets tests prove
 * the client renders service numbers instead of computing its own.
 */
export function mockService(options: {
  score?: (body: { text: string }) => Response | Promise<Response>;
  compare?: (body: { variants: Array<{ label: string; text: string }> }) => Response | Promise<Response>;
  health?: () => Response;
} = {}): MockService {
  const calls: RecordedCall[] = [];
  const fetchFn: FetchLike = async (url, init) => {
    const body = init?.body ? JSON.parse(String(init.body)) : null;
    calls.push({ url, method: init?.method ?? "GET", body });
    if (url.endsWith("/v1/score")) {
      const handler = options.score ?? (() => jsonResponse(scorePayload()));
      return handler(body);
    }
    if (url.endsWith("/v1/compare")) {
      const handler = options.compare ?? ((b) => jsonResponse(defaultCompare(b.variants)));
      return handler(body);
    }
    if (url.endsWith("/v1/health")) {
      const handler = options.health ?? (() => jsonResponse({ status: "ok", model_loaded: true }));
      return handler();
    }
    return jsonResponse({ error: { code: "not_found", message: `no route ${url}` } }, 404);
  };
  return { fetch: fetchFn, calls };
}

/** Identical texts get identical payloads, so deltas are exactly zero. */
export function defaultCompare(variants: Array<{ label: string; text: string }>): CompareResponse {
  const texts = [...new Set(variants.map((v) => v.text))];
  const payloadFor = new Map(texts.map((t, i) => [t, scorePayload(i * 0.5)]));
  const scored = variants.map((v) => {
    const p = payloadFor.get(v.text)!;
    return {
      label: v.label,
      profile: p.profile,
      statement_scores: p.statement_scores,
      predicted_engagement: {
        log_score: { prediction: 1.0 + 0.25 * texts.indexOf(v.text), interval: [0.5, 1.5] as [number, number] },
      },
    };
  });
  const base = scored[0]!;
  const deltas = scored.slice(1).map((s) => ({
    label: s.label,
    baseline: base.label,
    profile_delta: Object.fromEntries(
      Object.keys(base.profile).map((d) => [d, round2(s.profile[d]! - base.profile[d]!)]),
    ),
    engagement_delta: {
      log_score: round2(
        s.predicted_engagement.log_score.prediction - base.predicted_engagement.log_score.prediction,
      ),
    },
  }));
  return { variants: scored, deltas };
}

function round2(x: number): number {
  return Math.round(x * 100) / 100;
}

/** A score handler whose response resolution is controlled by the test. */
export function delayedScore(): {
  handler: () => Promise<Response>;
  resolve: (payload?: ScoreResponse) => void;
} {
  let release: (r: Response) => void;
  const gate = new Promise<Response>((res) => {
    release = res;
  });
  return {
    handler: () => gate,
    resolve: (payload) => release(jsonResponse(payload ?? scorePayload())),
  };
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
