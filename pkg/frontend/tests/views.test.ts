import { describe, expect, it } from "vitest";

import { AnnotationSession } from "../src/session.js";
import {
  escapeHtml,
  renderAidPanel,
  renderCandidates,
  renderStats,
  renderSuggestionCards,
  renderTask,
} from "../src/views.js";
import { DEMOS, TASK, TAXONOMY } from "./fixtures.js";

function countOf(html: string, needle: string): number {
  return html.split(needle).length - 1;
}

describe("suggestion cards", () => {
  it("renders exactly 3 cards even when more demos are supplied", () => {
    const extra = [...DEMOS, { ...DEMOS[0], doc_id: "d4" }, { ...DEMOS[1], doc_id: "d5" }];
    const html = renderSuggestionCards(extra);
    expect(countOf(html, "suggestion-card")).toBe(3);
    expect(html).not.toContain("d4");
  });

  it("prints scores verbatim, unrounded and in server order", () => {
    const html = renderSuggestionCards(DEMOS);
    expect(html).toContain("0.987654321");
    expect(html.indexOf("d1")).toBeLessThan(html.indexOf("d2"));
    expect(html.indexOf("d2")).toBeLessThan(html.indexOf("d3"));
  });

  it("escapes demo text", () => {
    const html = renderSuggestionCards([
      { doc_id: "d", text: "<script>alert(1)</script>", score: 1, labels: ["AI", "Machine Learning"] },
    ]);
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });
});

describe("aid panels", () => {
  it("the three modes render three distinct panels", () => {
    const direct = renderAidPanel("direct", DEMOS);
    const descr = renderAidPanel("with-descriptions", DEMOS);
    const retr = renderAidPanel("retrieval-assisted", DEMOS);
    expect(new Set([direct, descr, retr]).size).toBe(3);
    expect(direct).toContain("aid-direct");
    expect(descr).toContain("aid-descriptions");
    expect(retr).toContain("aid-retrieval");
    expect(countOf(retr, "suggestion-card")).toBe(3);
    expect(countOf(direct, "suggestion-card")).toBe(0);
    expect(countOf(descr, "suggestion-card")).toBe(0);
  });

  it("descriptions render only when requested", () => {
    const nodes = TAXONOMY.nodes.filter((n) => n.level === 1);
    expect(renderCandidates(nodes, true)).toContain("machines that learn");
    expect(renderCandidates(nodes, false)).not.toContain("machines that learn");
  });
});

describe("task view", () => {
  function sessionIn(mode: "direct" | "with-descriptions" | "retrieval-assisted") {
    const s = new AnnotationSession(TAXONOMY, { annotator: "ada", k: 3, mode });
    s.loadTask(TASK, DEMOS);
    return s;
  }

  it("shows the document, candidates, and mode toggle", () => {
    const html = renderTask(sessionIn("direct"));
    expect(html).toContain("a neural network paper");
    expect(html).toContain('data-name="AI"');
    expect(html).toContain('data-name="Biology"');
    expect(html).toContain('data-mode="retrieval-assisted"');
    expect(html).not.toContain('class="back"');
  });

  it("offers back after a choice and submit only when complete", () => {
    const s = sessionIn("direct");
    s.choose("AI");
    let html = renderTask(s);
    expect(html).toContain('class="back"');
    expect(html).not.toContain('class="submit"');
    s.choose("Machine Learning");
    html = renderTask(s);
    expect(html).toContain('class="submit"');
  });

  it("retrieval-assisted mode shows exactly 3 suggestion cards", () => {
    const html = renderTask(sessionIn("retrieval-assisted"));
    expect(countOf(html, "suggestion-card")).toBe(3);
  });
});

describe("stats view", () => {
  it("aggregates per-mode counts and agreement", () => {
    const html = renderStats({
      count: 5,
      avg_seconds: 4.25,
      per_mode: {
        direct: { count: 3, avg_seconds: 6 },
        "retrieval-assisted": { count: 2, avg_seconds: 1.5 },
      },
      agreement: { docs_multi_annotated: 2, docs_all_agree: 1 },
    });
    expect(html).toContain("5 annotations");
    expect(html).toContain("4.3s average");
    expect(html).toContain("<td>direct</td><td>3</td><td>6.0s</td>");
    expect(html).toContain("1 of 2 multiply-annotated documents agree");
  });
});

describe("escapeHtml", () => {
  it("escapes the four risky characters", () => {
    expect(escapeHtml(`<a href="x">&</a>`)).toBe(
      "&lt;a href=&quot;x&quot;&gt;&amp;&lt;/a&gt;",
    );
  });
});
