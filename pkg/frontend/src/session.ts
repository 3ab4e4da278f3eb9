/** Annotation session state machine.
 *
 * The annotator walks the label tree one level at a time; a choice is only
 * accepted if it is among the displayed candidates, so the session can never
 * produce a path the taxonomy rejects. Submission failures keep the state
 * intact so the same submission can be retried.
 */

import {
  AnnotationMode,
  AnnotationSubmission,
  ApiClient,
  Demo,
  Task,
  Taxonomy,
  TaxonomyNode,
} from "./api.js";

export const ROOT_ID = 0;

export interface SessionConfig {
  annotator: string;
  k: number;
  mode: AnnotationMode;
  /** Injectable clock for tests; milliseconds. */
  now?: () => number;
}

export class SessionError extends Error {}

export class TaxonomyIndex {
  private byId = new Map<number, TaxonomyNode>();

  constructor(public readonly taxonomy: Taxonomy) {
    for (const node of taxonomy.nodes) {
      this.byId.set(node.id, node);
    }
    if (!this.byId.has(ROOT_ID)) {
      throw new SessionError("taxonomy has no root node");
    }
  }

  get depth(): number {
    return this.taxonomy.depth;
  }

  node(id: number): TaxonomyNode {
    const node = this.byId.get(id);
    if (!node) throw new SessionError(`unknown node id ${id}`);
    return node;
  }

  childrenOf(id: number): TaxonomyNode[] {
    return this.node(id).children.map((c) => this.node(c));
  }
}

/** Candidates at the next level: the intersection of the current node's
 * children with the demos' labels at that level, the children as a whole
 * when the intersection is empty or no demos are shown. */
export function candidateNodes(
  index: TaxonomyIndex,
  currentId: number,
  level: number,
  demos: Demo[],
): TaxonomyNode[] {
  const children = index.childrenOf(currentId);
  if (demos.length === 0) return children;
  const demoLabels = new Set(demos.map((d) => d.labels[level - 1]));
  const pruned = children.filter((c) => demoLabels.has(c.name));
  return pruned.length > 0 ? pruned : children;
}

export class AnnotationSession {
  private index: TaxonomyIndex;
  private chosenIds: number[] = [];
  private task: Task | null = null;
  private demos: Demo[] = [];
  private openedAtMs = 0;
  private firstChoiceAtMs: number | null = null;
  private submitted = false;
  private now: () => number;
  mode: AnnotationMode;

  constructor(taxonomy: Taxonomy, private config: SessionConfig) {
    this.index = new TaxonomyIndex(taxonomy);
    this.mode = config.mode;
    this.now = config.now ?? (() => Date.now());
  }

  loadTask(task: Task, demos: Demo[] = []): void {
    this.task = task;
    this.demos = demos;
    this.chosenIds = [];
    this.openedAtMs = this.now();
    this.firstChoiceAtMs = null;
    this.submitted = false;
  }

  setMode(mode: AnnotationMode): void {
    this.mode = mode;
  }

  get currentTask(): Task {
    if (!this.task) throw new SessionError("no task loaded");
    return this.task;
  }

  /** Demos visible in the current mode; only retrieval-assisted shows any. */
  visibleDemos(): Demo[] {
    return this.mode === "retrieval-assisted"
      ? this.demos.slice(0, this.config.k)
      : [];
  }

  /** 1-based level the annotator is choosing next. */
  get level(): number {
    return this.chosenIds.length + 1;
  }

  get chosenNames(): string[] {
    return this.chosenIds.map((id) => this.index.node(id).name);
  }

  isComplete(): boolean {
    return this.chosenIds.length === this.index.depth;
  }

  candidates(): TaxonomyNode[] {
    if (this.isComplete()) return [];
    const current =
      this.chosenIds.length === 0
        ? ROOT_ID
        : this.chosenIds[this.chosenIds.length - 1];
    return candidateNodes(this.index, current, this.level, this.visibleDemos());
  }

  choose(name: string): void {
    this.currentTask; // a task must be loaded
    if (this.isComplete()) {
      throw new SessionError("path already complete; submit or go back");
    }
    const match = this.candidates().find((c) => c.name === name);
    if (!match) {
      throw new SessionError(`"${name}" is not among the displayed candidates`);
    }
    if (this.firstChoiceAtMs === null) this.firstChoiceAtMs = this.now();
    this.chosenIds.push(match.id);
  }

  back(): void {
    if (this.chosenIds.length === 0) {
      throw new SessionError("already at the first level");
    }
    this.chosenIds.pop();
  }

  /** Seconds since the task was opened; never negative. */
  elapsedSeconds(): number {
    return Math.max(0, (this.now() - this.openedAtMs) / 1000);
  }

  /** Seconds spent before the first choice (the reading span). */
  readingSeconds(): number | null {
    if (this.firstChoiceAtMs === null) return null;
    return Math.max(0, (this.firstChoiceAtMs - this.openedAtMs) / 1000);
  }

  buildSubmission(): AnnotationSubmission {
    const task = this.currentTask;
    if (!this.isComplete()) {
      throw new SessionError(
        `path has ${this.chosenIds.length} of ${this.index.depth} levels`,
      );
    }
    return {
      annotator: this.config.annotator,
      path: this.chosenNames,
      seconds: this.elapsedSeconds(),
      mode: this.mode,
      suggestion: task.suggestion,
    };
  }

  /** Submits the completed path. On failure the session state is untouched,
   * so calling submit again retries the same annotation. */
  async submit(client: ApiClient): Promise<void> {
    if (this.submitted) throw new SessionError("task already submitted");
    const body = this.buildSubmission();
    await client.submitAnnotation(this.currentTask.id, body);
    this.submitted = true;
  }

  get isSubmitted(): boolean {
    return this.submitted;
  }
}
