import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { TAXONOMY } from "./fixtures.js";

interface Call {
  url: string;
  init?: RequestInit;
}

function clientReturning(body: unknown, status = 200) {
  const calls: Call[] = [];
  const client = new ApiClient("http://svc", async (url, init) => {
    calls.push({ url, init });
    return new Response(JSON.stringify(body), { status });
  });
  return { client, calls };
}

describe("ApiClient", () => {
  it("fetches the taxonomy", async () => {
    const { client, calls } = clientReturning(TAXONOMY);
    const tax = await client.taxonomy();
    expect(tax.depth).toBe(2);
    expect(calls[0].url).toBe("http://svc/api/taxonomy");
  });

  it("posts retrieve with text and k", async () => {
    const { client, calls } = clientReturning({ demos: [] });
    await client.retrieve("some doc", 3);
    expect(calls[0].url).toBe("http://svc/api/retrieve");
    expect(calls[0].init?.method).toBe("POST");
    expect(JSON.parse(calls[0].init?.body as string)).toEqual({
      text: "some doc",
      k: 3,
    });
  });

  it("url-encodes the annotator and task id", async () => {
    const { client, calls } = clientReturning({ ok: true });
    await client.nextTask("ada lovelace");
    await client.submitAnnotation("doc/7", {
      annotator: "ada lovelace",
      path: ["AI", "Machine Learning"],
      seconds: 4.5,
      mode: "direct",
      suggestion: null,
    });
    expect(calls[0].url).toBe("http://svc/api/tasks/next?annotator=ada%20lovelace");
    expect(calls[1].url).toBe("http://svc/api/tasks/doc%2F7/annotation");
  });

  it("sends the annotation body unchanged", async () => {
    const { client, calls } = clientReturning({ ok: true });
    const body = {
      annotator: "ada",
      path: ["Biology", "Genetics"],
      seconds: 2.5,
      mode: "retrieval-assisted" as const,
      suggestion: ["AI", "Machine Learning"],
    };
    await client.submitAnnotation("t1", body);
    expect(JSON.parse(calls[0].init?.body as string)).toEqual(body);
    expect(calls[0].init?.headers).toMatchObject({
      "content-type": "application/json",
    });
  });

  it("raises ApiError carrying the status code on failure", async () => {
    const { client } = clientReturning({ detail: "conflict" }, 409);
    const err = await client
      .submitAnnotation("t1", {
        annotator: "ada",
        path: ["AI", "Machine Learning"],
        seconds: 1,
        mode: "direct",
        suggestion: null,
      })
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(409);
  });

  it("surfaces 404 from the task queue as an ApiError", async () => {
    const { client } = clientReturning({ detail: "done" }, 404);
    await expect(client.nextTask("ada")).rejects.toMatchObject({ status: 404 });
  });
});
