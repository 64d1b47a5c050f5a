// Typed client for the knowledge-graph service. All calls go through an
// injectable fetch so tests can count and stub requests.

export interface MasteryEntry {
  correct: number;
  incorrect: number;
  status: "failed" | "mastered" | "unobserved";
}

export interface FaultTreeNode {
  id: string;
  depth: number;
  failure_rate: number;
  score: number;
  children: FaultTreeNode[];
}

export interface FaultTree {
  root: FaultTreeNode;
  evidence_paths: string[][];
}

export interface FaultsResponse {
  student: string;
  mastery: Record<string, MasteryEntry>;
  trees: FaultTree[];
  ranking: { entity: string; score: number }[];
  message: string;
}

export interface PathStep {
  entity: string;
  relation: string;
  direction: "->" | "<-";
}

export interface SearchHit {
  entity: string;
  score: number;
  lexical_score: number;
  embedding_score: number;
  path: PathStep[];
}

export interface SearchResponse {
  topic: string;
  results: SearchHit[];
}

export interface AnswerPayload {
  student_id: string;
  question_id: string;
  knowledge_points: string[];
  correct: boolean;
}

export type Fetch = typeof fetch;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  const body = await resp.json();
  if (!resp.ok) {
    throw new ApiError(resp.status, (body as { error?: string }).error ?? resp.statusText);
  }
  return body as T;
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: Fetch = fetch,
  ) {}

  async search(q: string, lambda?: number): Promise<SearchResponse> {
    const params = new URLSearchParams({ q });
    if (lambda !== undefined) params.set("lambda", String(lambda));
    const resp = await this.fetchFn(`${this.baseUrl}/api/search?${params}`);
    return asJson<SearchResponse>(resp);
  }

  async faults(student: string): Promise<FaultsResponse> {
    const params = new URLSearchParams({ student });
    const resp = await this.fetchFn(`${this.baseUrl}/api/faults?${params}`);
    return asJson<FaultsResponse>(resp);
  }

  async submitAnswer(payload: AnswerPayload): Promise<void> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/answers`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    await asJson<{ ok: boolean }>(resp);
  }
}
