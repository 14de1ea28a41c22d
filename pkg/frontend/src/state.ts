import type { ApiClient } from "./api.js";
import type { CompareResponse, ScoreResponse } from "./types.js";

export interface DraftVariant {
  label: string;
  text: string;
  /** Last accepted service response; never computed locally, never persisted. */
  lastScore: ScoreResponse | null;
  /** True whenever the text changed since the last accepted scoring. */
  dirty: boolean;
  inFlight: boolean;
  lastError: string | null;
}

export type ScoreOutcome =
  | { stale: true }
  | { stale: false; response: ScoreResponse };

export class DuplicateLabelError extends Error {}
export class UnknownVariantError extends Error {}
export class EmptyDraftError extends Error {}
export class RequestInFlightError extends Error {}

export class NeedsScoringError extends Error {
  constructor(readonly labels: string[]) {
    super(`score these variants first: ${labels.join(", ")}`);
    this.name = "NeedsScoringError";
  }
}

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

const STORAGE_KEY = "percept-studio-drafts";

interface VariantState extends DraftVariant {
  /** Bumped on every edit; a score response landing after an edit is stale. */
  textVersion: number;
}

/**
 * Session state for the studio. Drafts (label + text only) survive reload via
 * the injected storage; model outputs are session-local and discarded on
 * reload so stale scores are never shown.
 */
export class StudioSession {
  private readonly variants = new Map<string, VariantState>();
  private readonly listeners: Array<() => void> = [];

  constructor(
    private readonly api: ApiClient,
    private readonly storage?: StorageLike,
  ) {
    this.restore();
  }

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  list(): DraftVariant[] {
    return [...this.variants.values()];
  }

  get(label: string): DraftVariant {
    const v = this.variants.get(label);
    if (!v) throw new UnknownVariantError(`no variant labeled ${label}`);
    return v;
  }

  addVariant(label: string, text = ""): void {
    if (!label.trim()) throw new DuplicateLabelError("label must be non-empty");
    if (this.variants.has(label)) {
      throw new DuplicateLabelError(`label already in use: ${label}`);
    }
    this.variants.set(label, {
      label,
      text,
      lastScore: null,
      dirty: true,
      inFlight: false,
      lastError: null,
      textVersion: 0,
    });
    this.persist();
    this.notify();
  }

  removeVariant(label: string): void {
    this.variants.delete(label);
    this.persist();
    this.notify();
  }

  /** silent skips listener notification (used while typing, so the DOM
   * around the focused textarea is not rebuilt mid-keystroke). */
  updateText(label: string, text: string, opts: { silent?: boolean } = {}): void {
    const v = this.variants.get(label);
    if (!v) throw new UnknownVariantError(`no variant labeled ${label}`);
    if (v.text === text) return;
    v.text = text;
    v.dirty = true;
    v.textVersion += 1;
    this.persist();
    if (!opts.silent) this.notify();
  }

  /**
   * Score one draft. Empty drafts never reach the service. At most one
   * request is in flight per variant, and a response racing a newer edit is
   * discarded by sequence-number comparison.
   */
  async scoreDraft(label: string): Promise<ScoreOutcome> {
    const v = this.variants.get(label);
    if (!v) throw new UnknownVariantError(`no variant labeled ${label}`);
    if (!v.text.trim()) throw new EmptyDraftError("draft text is empty");
    if (v.inFlight) throw new RequestInFlightError(`already scoring ${label}`);

    const sentVersion = v.textVersion;
    v.inFlight = true;
    v.lastError = null;
    this.notify();
    let response: ScoreResponse;
    try {
      response = await this.api.score(v.text);
    } catch (err) {
      v.inFlight = false;
      v.lastError = err instanceof Error ? err.message : String(err);
      this.notify();
      throw err;
    }
    v.inFlight = false;
    if (v.textVersion !== sentVersion || !this.variants.has(label)) {
      this.notify();
      return { stale: true };
    }
    v.lastScore = response;
    v.dirty = false;
    this.notify();
    return { stale: false, response };
  }

  /** Labels of variants that are not scored-and-current. */
  unscoredLabels(): string[] {
    return this.list()
      .filter((v) => v.lastScore === null || v.dirty)
      .map((v) => v.label);
  }

  /**
   * Compare all variants through the service. Every variant must be scored
   * and clean first (the UI prompts for scoring otherwise).
   */
  async compareVariants(): Promise<CompareResponse> {
    const all = this.list();
    if (all.length < 2) throw new NeedsScoringError(this.unscoredLabels());
    const unscored = this.unscoredLabels();
    if (unscored.length > 0) throw new NeedsScoringError(unscored);
    return this.api.compare(all.map((v) => ({ label: v.label, text: v.text })));
  }

  private persist(): void {
    if (!this.storage) return;
    const drafts = this.list().map((v) => ({ label: v.label, text: v.text }));
    this.storage.setItem(STORAGE_KEY, JSON.stringify(drafts));
  }

  private restore(): void {
    if (!this.storage) return;
    const raw = this.storage.getItem(STORAGE_KEY);
    if (!raw) return;
    try {
      const drafts = JSON.parse(raw) as Array<{ label: string; text: string }>;
      for (const d of drafts) {
        if (typeof d.label === "string" && typeof d.text === "string" && !this.variants.has(d.label)) {
          this.variants.set(d.label, {
            label: d.label,
            text: d.text,
            lastScore: null,
            dirty: true,
            inFlight: false,
            lastError: null,
            textVersion: 0,
          });
        }
      }
    } catch {
      // corrupted persistence is dropped, not fatal
    }
  }
}

/** Keys with the largest-magnitude value (ties included); used for highlighting. */
export function largestMagnitudeKeys(deltas: Record<string, number>): string[] {
  let max = -Infinity;
  for (const v of Object.values(deltas)) {
    const m = Math.abs(v);
    if (m > max) max = m;
  }
  if (!isFinite(max) || max === 0) return [];
  return Object.keys(deltas).filter((k) => Math.abs(deltas[k]!) === max);
}
