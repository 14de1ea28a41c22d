import { profileBarSvg, profileRadarSvg } from "./chart.js";
import { PERCENT_TOOLTIP, formatDelta, formatPercent, formatScore } from "./format.js";
import {
  EmptyDraftError,
  NeedsScoringError,
  RequestInFlightError,
  StudioSession,
  largestMagnitudeKeys,
} from "./state.js";
import type { CompareResponse } from "./types.js";

/**
 * DOM layer. Every displayed number comes straight out of a service response
 * held in session state or the compare payload; this module only formats.
 */
export class StudioView {
  private compareResult: CompareResponse | null = null;
  private banner: string | null = null;

  constructor(
    private readonly session: StudioSession,
    private readonly root: HTMLElement,
  ) {
    session.subscribe(() => this.render());
  }

  render(): void {
    this.root.innerHTML = "";
    this.root.append(this.renderBanner(), this.renderVariants(), this.renderCompare());
  }

  private setBanner(message: string | null): void {
    this.banner = message;
    this.render();
  }

  private renderBanner(): HTMLElement {
    const el = document.createElement("div");
    el.className = "banner";
    if (this.banner) {
      el.classList.add("banner-error");
      el.textContent = this.banner;
      const retry = document.createElement("button");
      retry.textContent = "dismiss";
      retry.addEventListener("click", () => this.setBanner(null));
      el.append(" ", retry);
    }
    return el;
  }

  private renderVariants(): HTMLElement {
    const wrap = document.createElement("section");
    wrap.className = "variants";

    for (const variant of this.session.list()) {
      const card = document.createElement("article");
      card.className = "variant";
      card.dataset.label = variant.label;

      const head = document.createElement("header");
      const title = document.createElement("strong");
      title.textContent = variant.label;
      const status = document.createElement("span");
      status.className = "status";
      status.textContent = variant.inFlight
        ? "scoring…"
        : variant.dirty
          ? variant.lastScore
            ? "edited since scoring"
            : "not scored"
          : "scored";
      const remove = document.createElement("button");
      remove.textContent = "remove";
      remove.addEventListener("click", () => {
        this.session.removeVariant(variant.label);
      });
      head.append(title, " ", status, " ", remove);
      card.append(head);

      const textarea = document.createElement("textarea");
      textarea.value = variant.text;
      textarea.rows = 4;
      textarea.addEventListener("input", () => {
        this.session.updateText(variant.label, textarea.value, { silent: true });
        status.textContent = variant.lastScore ? "edited since scoring" : "not scored";
      });
      card.append(textarea);

      const controls = document.createElement("div");
      const scoreBtn = document.createElement("button");
      scoreBtn.className = "score";
      scoreBtn.textContent = "score draft";
      scoreBtn.disabled = variant.inFlight;
      const validation = document.createElement("span");
      validation.className = "validation";
      scoreBtn.addEventListener("click", () => {
        validation.textContent = "";
        this.session.scoreDraft(variant.label).catch((err) => {
          if (err instanceof EmptyDraftError) {
            validation.textContent = "draft is empty - nothing to score";
          } else if (err instanceof RequestInFlightError) {
            validation.textContent = "already scoring";
          } else {
            this.setBanner(`scoring ${variant.label} failed: ${String(err instanceof Error ? err.message : err)} - draft preserved, retry when the service is back`);
          }
        });
      });
      controls.append(scoreBtn, validation);
      card.append(controls);

      if (variant.lastError) {
        const err = document.createElement("p");
        err.className = "variant-error";
        err.textContent = variant.lastError;
        card.append(err);
      }

      if (variant.lastScore) {
        const charts = document.createElement("div");
        charts.className = "charts";
        charts.innerHTML =
          profileRadarSvg(variant.lastScore.profile) + profileBarSvg(variant.lastScore.profile);
        card.append(charts);

        const details = document.createElement("details");
        const summary = document.createElement("summary");
        summary.textContent = "25 statement scores";
        details.append(summary);
        const list = document.createElement("table");
        list.className = "statement-scores";
        for (const [sid, value] of Object.entries(variant.lastScore.statement_scores)) {
          const row = list.insertRow();
          row.insertCell().textContent = sid;
          const cell = row.insertCell();
          cell.textContent = formatScore(value);
          cell.dataset.statement = sid;
        }
        details.append(list);
        card.append(details);
      }
      wrap.append(card);
    }

    const addBtn = document.createElement("button");
    addBtn.id = "add-variant";
    addBtn.textContent = "add variant";
    addBtn.addEventListener("click", () => {
      const label = `variant ${this.session.list().length + 1}`;
      try {
        this.session.addVariant(label);
      } catch {
        this.session.addVariant(`${label} (${Date.now()})`);
      }
    });
    wrap.append(addBtn);
    return wrap;
  }

  private renderCompare(): HTMLElement {
    const wrap = document.createElement("section");
    wrap.className = "compare";
    const btn = document.createElement("button");
    btn.id = "compare";
    btn.textContent = "compare variants";
    btn.addEventListener("click", () => {
      this.session
        .compareVariants()
        .then((result) => {
          this.compareResult = result;
          this.render();
        })
        .catch((err) => {
          if (err instanceof NeedsScoringError) {
            this.setBanner(
              err.labels.length > 0
                ? `score these variants first: ${err.labels.join(", ")}`
                : "add at least two variants to compare",
            );
          } else {
            this.setBanner(`compare failed: ${String(err instanceof Error ? err.message : err)}`);
          }
        });
    });
    wrap.append(btn);

    if (this.compareResult) {
      const known = new Set(this.session.list().map((v) => v.label));
      const deltas = this.compareResult.deltas.filter(
        (d) => known.has(d.label) && known.has(d.baseline),
      );
      for (const delta of deltas) {
        const block = document.createElement("div");
        block.className = "delta-block";
        const caption = document.createElement("h3");
        caption.textContent = `${delta.label} vs ${delta.baseline}`;
        block.append(caption);

        const table = document.createElement("table");
        table.className = "delta-table";
        const hot = new Set(largestMagnitudeKeys(delta.profile_delta));
        for (const [dim, value] of Object.entries(delta.profile_delta)) {
          const row = table.insertRow();
          if (hot.has(dim)) row.classList.add("highlight");
          row.insertCell().textContent = dim;
          const cell = row.insertCell();
          cell.textContent = formatDelta(value);
          cell.dataset.deltaDimension = dim;
        }
        block.append(table);

        const engagement = document.createElement("p");
        engagement.className = "engagement-deltas";
        for (const [outcome, value] of Object.entries(delta.engagement_delta)) {
          const span = document.createElement("span");
          span.title = PERCENT_TOOLTIP;
          span.dataset.outcome = outcome;
          span.textContent = `${outcome}: ${formatPercent(value)} `;
          engagement.append(span);
        }
        block.append(engagement);
        wrap.append(block);
      }
    }
    return wrap;
  }
}
