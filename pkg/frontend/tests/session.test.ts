import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { AnnotationSession, SessionError } from "../src/session.js";
import { DEMOS, TASK, TAXONOMY } from "./fixtures.js";

function makeSession(mode: "direct" | "with-descriptions" | "retrieval-assisted", now?: () => number) {
  return new AnnotationSession(TAXONOMY, { annotator: "ada", k: 3, mode, now });
}

describe("candidate display", () => {
  it("shows all root children in direct mode", () => {
    const s = makeSession("direct");
    s.loadTask(TASK, DEMOS);
    expect(s.candidates().map((c) => c.name)).toEqual(["AI", "Biology"]);
  });

  it("prunes to demo labels in retrieval-assisted mode", () => {
    const s = makeSession("retrieval-assisted");
    s.loadTask(TASK, DEMOS);
    expect(s.candidates().map((c) => c.name)).toEqual(["AI"]);
    s.choose("AI");
    expect(s.candidates().map((c) => c.name)).toEqual([
      "Machine Learning",
      "Computer Vision",
    ]);
  });

  it("falls back to all children when no demo label matches", () => {
    const s = makeSession("retrieval-assisted");
    s.loadTask(TASK, [
      { doc_id: "x", text: "", score: 0.5, labels: ["Biology", "Genetics"] },
    ]);
    s.choose("Biology");
    s.back();
    s.choose("Biology");
    // demos all sit under Biology/Genetics, but Ecology still renders via fallback
    expect(s.candidates().map((c) => c.name)).toEqual(["Genetics"]);
  });
});

describe("path validity", () => {
  it("rejects a choice outside the displayed candidates", () => {
    const s = makeSession("direct");
    s.loadTask(TASK, []);
    expect(() => s.choose("Machine Learning")).toThrow(SessionError);
    expect(() => s.choose("not a label")).toThrow(/not among/);
    expect(s.chosenNames).toEqual([]);
  });

  it("cannot build a submission from a partial path", () => {
    const s = makeSession("direct");
    s.loadTask(TASK, []);
    s.choose("AI");
    expect(() => s.buildSubmission()).toThrow(/1 of 2 levels/);
  });

  it("a complete path is always parent-to-child", () => {
    const s = makeSession("direct");
    s.loadTask(TASK, []);
    s.choose("Biology");
    expect(() => s.choose("Machine Learning")).toThrow(SessionError);
    s.choose("Genetics");
    expect(s.isComplete()).toBe(true);
    expect(s.buildSubmission().path).toEqual(["Biology", "Genetics"]);
  });
});

describe("back navigation and timer", () => {
  it("back restores the previous level while the timer keeps running", () => {
    let t = 1000;
    const s = makeSession("direct", () => t);
    s.loadTask(TASK, []);
    t += 2000;
    s.choose("AI");
    expect(s.level).toBe(2);
    s.back();
    expect(s.level).toBe(1);
    expect(s.candidates().map((c) => c.name)).toEqual(["AI", "Biology"]);
    t += 3000;
    expect(s.elapsedSeconds()).toBe(5);
    expect(s.readingSeconds()).toBe(2);
  });

  it("back below the first level is an error", () => {
    const s = makeSession("direct");
    s.loadTask(TASK, []);
    expect(() => s.back()).toThrow(/first level/);
  });

  it("loading a new task resets the timer", () => {
    let t = 0;
    const s = makeSession("direct", () => t);
    s.loadTask(TASK, []);
    t = 9000;
    s.loadTask({ ...TASK, id: "t2" }, []);
    t = 10000;
    expect(s.elapsedSeconds()).toBe(1);
  });
});

describe("modes", () => {
  it("demos are visible only in retrieval-assisted mode", () => {
    const s = makeSession("direct");
    s.loadTask(TASK, DEMOS);
    expect(s.visibleDemos()).toEqual([]);
    s.setMode("with-descriptions");
    expect(s.visibleDemos()).toEqual([]);
    s.setMode("retrieval-assisted");
    expect(s.visibleDemos()).toHaveLength(3);
  });

  it("each submission is stamped with the active mode", () => {
    for (const mode of ["direct", "with-descriptions", "retrieval-assisted"] as const) {
      const s = makeSession(mode);
      s.loadTask(TASK, DEMOS);
      s.choose(s.candidates()[0].name);
      s.choose(s.candidates()[0].name);
      const body = s.buildSubmission();
      expect(body.mode).toBe(mode);
      expect(body.annotator).toBe("ada");
      expect(body.suggestion).toEqual(TASK.suggestion);
    }
  });
});

describe("submit", () => {
  function clientWith(responses: Array<number>) {
    const calls: string[] = [];
    const client = new ApiClient("", async (url) => {
      calls.push(url);
      const status = responses.shift() ?? 200;
      return new Response(JSON.stringify({ ok: true }), { status });
    });
    return { client, calls };
  }

  it("a failed submit keeps state so the same path can be retried", async () => {
    const { client, calls } = clientWith([500, 200]);
    const s = makeSession("direct");
    s.loadTask(TASK, []);
    s.choose("AI");
    s.choose("Machine Learning");
    await expect(s.submit(client)).rejects.toThrow(/500/);
    expect(s.isSubmitted).toBe(false);
    expect(s.chosenNames).toEqual(["AI", "Machine Learning"]);
    await s.submit(client);
    expect(s.isSubmitted).toBe(true);
    expect(calls).toEqual([
      "/api/tasks/t1/annotation",
      "/api/tasks/t1/annotation",
    ]);
  });

  it("double submit of the same task is rejected locally", async () => {
    const { client } = clientWith([200]);
    const s = makeSession("direct");
    s.loadTask(TASK, []);
    s.choose("AI");
    s.choose("Machine Learning");
    await s.submit(client);
    await expect(s.submit(client)).rejects.toThrow(/already submitted/);
  });
});
