// @vitest-environment jsdom
import { beforeEach, describe, expect, test } from "vitest";

import { ApiClient } from "../src/api.js";
import { StudioSession } from "../src/state.js";
import { StudioView } from "../src/view.js";
import {
  DIMENSIONS,
  delayedScore,
  flush,
  jsonResponse,
  mockService,
  scorePayload,
  sentinelProfile,
  type MockService,
} from "./helpers.js";

function mount(service: MockService) {
  document.body.innerHTML = '<main id="studio"></main>';
  const root = document.getElementById("studio")!;
  const session = new StudioSession(new ApiClient("http://svc", service.fetch));
  const view = new StudioView(session, root);
  view.render();
  return { session, view, root };
}

function card(root: HTMLElement, label: string): HTMLElement {
  const el = root.querySelector(`article[data-label="${label}"]`);
  if (!el) throw new Error(`no card for ${label}`);
  return el as HTMLElement;
}

function clickScore(root: HTMLElement, label: string): void {
  (card(root, label).querySelector("button.score") as HTMLButtonElement).click();
}

function clickCompare(root: HTMLElement): void {
  (root.querySelector("#compare") as HTMLButtonElement).click();
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("scoring a draft", () => {
  test("renders the service's 12 dimension values, all in [1,5]", async () => {
    const service = mockService();
    const { session, root } = mount(service);
    session.addVariant("a", "a perfectly fine draft");
    clickScore(root, "a");
    await flush();

    const values = [...card(root, "a").querySelectorAll("[data-dimension-value]")];
    expect(values).toHaveLength(12);
    const expected = sentinelProfile();
    for (const el of values) {
      const dim = el.getAttribute("data-dimension-value")!;
      const shown = Number(el.textContent);
      expect(shown).toBeGreaterThanOrEqual(1);
      expect(shown).toBeLessThanOrEqual(5);
      // exactly the number the mock service returned, to display precision
      expect(shown).toBeCloseTo(expected[dim]!, 2);
    }
    expect(DIMENSIONS.every((d) => values.some((el) => el.getAttribute("data-dimension-value") === d))).toBe(true);
    // the only score request was the one we clicked
    expect(service.calls.filter((c) => c.url.endsWith("/v1/score"))).toHaveLength(1);
  });

  test("shows the 25 statement scores in the detail panel", async () => {
    const service = mockService();
    const { session, root } = mount(service);
    session.addVariant("a", "text");
    clickScore(root, "a");
    await flush();
    const rows = card(root, "a").querySelectorAll("[data-statement]");
    expect(rows).toHaveLength(25);
  });

  test("empty draft: inline validation, no request sent", async () => {
    const service = mockService();
    const { session, root } = mount(service);
    session.addVariant("a", "   ");
    clickScore(root, "a");
    await flush();
    expect(service.calls).toHaveLength(0);
    expect(card(root, "a").querySelector(".validation")!.textContent).toContain("empty");
  });

  test("service down: error banner, draft preserved", async () => {
    const service = mockService({
      score: () => {
        throw new TypeError("fetch failed");
      },
    });
    const { session, root } = mount(service);
    session.addVariant("a", "do not lose me");
    clickScore(root, "a");
    await flush();
    const banner = root.querySelector(".banner-error");
    expect(banner).not.toBeNull();
    expect(banner!.textContent).toContain("draft preserved");
    const textarea = card(root, "a").querySelector("textarea") as HTMLTextAreaElement;
    expect(textarea.value).toBe("do not lose me");
  });

  test("stale response discarded after an edit (delayed mock)", async () => {
    const gate = delayedScore();
    const service = mockService({ score: gate.handler });
    const { root } = mount(service);

    const add = root.querySelector("#add-variant") as HTMLButtonElement;
    add.click();
    const textarea = card(root, "variant 1").querySelector("textarea") as HTMLTextAreaElement;
    textarea.value = "first wording";
    textarea.dispatchEvent(new Event("input"));

    clickScore(root, "variant 1");
    await flush();

    const edited = card(root, "variant 1").querySelector("textarea") as HTMLTextAreaElement;
    edited.value = "second wording, typed while scoring";
    edited.dispatchEvent(new Event("input"));

    gate.resolve();
    await flush();

    const after = card(root, "variant 1");
    expect(after.querySelector(".charts")).toBeNull();
    expect(after.querySelector(".status")!.textContent).toBe("not scored");
    expect((after.querySelector("textarea") as HTMLTextAreaElement).value).toBe(
      "second wording, typed while scoring",
    );
  });
});

describe("comparing variants", () => {
  test("identical variants show zero deltas", async () => {
    const service = mockService();
    const { session, root } = mount(service);
    session.addVariant("a", "same text");
    session.addVariant("b", "same text");
    clickScore(root, "a");
    await flush();
    clickScore(root, "b");
    await flush();
    clickCompare(root);
    await flush();

    const deltas = [...root.querySelectorAll("[data-delta-dimension]")];
    expect(deltas).toHaveLength(12);
    for (const el of deltas) {
      expect(el.textContent).toBe("0.00");
    }
    const engagement = root.querySelector(".engagement-deltas span") as HTMLElement;
    expect(engagement.textContent).toContain("0.0%");
    expect(engagement.title).toContain("exp(delta) - 1");
  });

  test("unscored variants prompt for scoring first", async () => {
    const service = mockService();
    const { session, root } = mount(service);
    session.addVariant("a", "one");
    session.addVariant("b", "two");
    clickScore(root, "a");
    await flush();
    clickCompare(root);
    await flush();
    expect(service.calls.some((c) => c.url.endsWith("/v1/compare"))).toBe(false);
    expect(root.querySelector(".banner-error")!.textContent).toContain("b");
  });

  test("three variants give two delta blocks; removal re-renders without it", async () => {
    const service = mockService();
    const { session, root } = mount(service);
    session.addVariant("a", "alpha text");
    session.addVariant("b", "beta text");
    session.addVariant("c", "gamma text");
    for (const label of ["a", "b", "c"]) {
      clickScore(root, label);
      await flush();
    }
    clickCompare(root);
    await flush();
    expect(root.querySelectorAll(".delta-block")).toHaveLength(2);

    (card(root, "c").querySelector("header button") as HTMLButtonElement).click();
    await flush();
    expect(root.querySelectorAll(".delta-block")).toHaveLength(1);
    expect(root.querySelector(".delta-block h3")!.textContent).toBe("b vs a");
  });

  test("largest-magnitude dimension delta row is highlighted", async () => {
    const service = mockService({
      compare: () =>
        jsonResponse({
          variants: [
            { label: "a", profile: sentinelProfile(), statement_scores: {}, predicted_engagement: { log_score: { prediction: 1, interval: [0, 2] } } },
            { label: "b", profile: sentinelProfile(), statement_scores: {}, predicted_engagement: { log_score: { prediction: 1.4, interval: [0.4, 2.4] } } },
          ],
          deltas: [
            {
              label: "b",
              baseline: "a",
              profile_delta: { Importance: 0.9, Fun: -0.2, Expertise: 0.1 },
              engagement_delta: { log_score: 0.4 },
            },
          ],
        }),
    });
    const { session, root } = mount(service);
    session.addVariant("a", "one");
    session.addVariant("b", "two");
    clickScore(root, "a");
    await flush();
    clickScore(root, "b");
    await flush();
    clickCompare(root);
    await flush();

    const highlighted = [...root.querySelectorAll("tr.highlight td:first-child")].map((el) => el.textContent);
    expect(highlighted).toEqual(["Importance"]);
  });
});
