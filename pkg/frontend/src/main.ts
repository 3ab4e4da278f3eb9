/** DOM wiring: fetch a task, walk the levels, submit, repeat. */

import { ApiClient, ApiError, Demo, Task } from "./api.js";
import { AnnotationSession } from "./session.js";
import { renderDone, renderError, renderStats, renderTask } from "./views.js";

const K = 3;

async function loadTask(
  client: ApiClient,
  session: AnnotationSession,
): Promise<boolean> {
  let task: Task;
  try {
    task = await client.nextTask(annotatorName());
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) return false;
    throw err;
  }
  let demos: Demo[] = [];
  try {
    demos = (await client.retrieve(task.text, K)).demos;
  } catch {
    // no suggestions is a degraded view, not a failure
  }
  session.loadTask(task, demos);
  return true;
}

function annotatorName(): string {
  const input = document.querySelector<HTMLInputElement>("#annotator");
  return input?.value.trim() || "anonymous";
}

function draw(root: HTMLElement, session: AnnotationSession): void {
  root.innerHTML = renderTask(session);
}

export async function start(root: HTMLElement): Promise<void> {
  const client = new ApiClient();
  const taxonomy = await client.taxonomy();
  const session = new AnnotationSession(taxonomy, {
    annotator: annotatorName(),
    k: K,
    mode: "retrieval-assisted",
  });

  const advance = async () => {
    if (await loadTask(client, session)) {
      draw(root, session);
    } else {
      root.innerHTML = renderDone() + renderStats(await client.stats());
    }
  };

  root.addEventListener("click", (event) => {
    const el = event.target as HTMLElement;
    void (async () => {
      if (el.matches("button.candidate")) {
        session.choose(el.dataset.name ?? "");
        draw(root, session);
      } else if (el.matches("button.back")) {
        session.back();
        draw(root, session);
      } else if (el.matches("button.mode")) {
        session.setMode(el.dataset.mode as never);
        draw(root, session);
      } else if (el.matches("button.submit") || el.matches("button.retry")) {
        try {
          await session.submit(client);
          await advance();
        } catch (err) {
          draw(root, session);
          root.insertAdjacentHTML(
            "beforeend",
            renderError(err instanceof Error ? err.message : String(err)),
          );
        }
      }
    })();
  });

  await advance();
}

const mount = document.getElementById("app");
if (mount) void start(mount);
