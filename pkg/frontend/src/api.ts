/** Typed client for the annotation service HTTP API. */

export interface TaxonomyNode {
  id: number;
  name: string;
  level: number;
  parent: number;
  children: number[];
  description: string | null;
}

export interface Taxonomy {
  depth: number;
  nodes: TaxonomyNode[];
}

export interface Demo {
  doc_id: string;
  text: string;
  score: number;
  labels: string[];
}

export interface Task {
  id: string;
  text: string;
  suggestion: string[] | null;
}

export type AnnotationMode = "direct" | "with-descriptions" | "retrieval-assisted";

export interface AnnotationSubmission {
  annotator: string;
  path: string[];
  seconds: number;
  mode: AnnotationMode;
  suggestion: string[] | null;
}

export interface Stats {
  count: number;
  avg_seconds: number;
  per_mode: Record<string, { count: number; avg_seconds: number }>;
  agreement: { docs_multi_annotated: number; docs_all_agree: number };
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, init);
    if (!resp.ok) {
      throw new ApiError(resp.status, `${path} failed with ${resp.status}`);
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  taxonomy(): Promise<Taxonomy> {
    return this.request<Taxonomy>("/api/taxonomy");
  }

  retrieve(text: string, k: number): Promise<{ demos: Demo[] }> {
    return this.post("/api/retrieve", { text, k });
  }

  nextTask(annotator: string): Promise<Task> {
    return this.request<Task>(
      `/api/tasks/next?annotator=${encodeURIComponent(annotator)}`,
    );
  }

  submitAnnotation(taskId: string, body: AnnotationSubmission): Promise<{ ok: boolean }> {
    return this.post(`/api/tasks/${encodeURIComponent(taskId)}/annotation`, body);
  }

  stats(): Promise<Stats> {
    return this.request<Stats>("/api/stats");
  }
}
