// Typed client for the platform API. The UI layer never computes metrics or
// ranks; every displayed number is a field from one of these payloads.

export interface RunInfo {
  run_id: string;
  dataset_id: string;
  status: string;
  wall_clock_seconds: number | null;
  exit_code: number | null;
  prediction_checksum: string | null;
  metrics: Record<string, number> | null;
  primary_metric: string | null;
}

export interface SubmissionDetail {
  submission_id: string;
  task: string;
  author: string;
  status: string;
  submitted_at: string;
  archive_checksum: string;
  runs: RunInfo[];
}

export interface PerDatasetResult {
  status: string;
  wall_clock_seconds: number | null;
  metrics: Record<string, number> | null;
  rank: number | null;
}

export interface LeaderboardEntry {
  submission_id: string;
  author: string;
  submitted_at: string;
  eligible: boolean;
  per_dataset: Record<string, PerDatasetResult>;
  mean_rank: number | null;
  total_runtime_seconds: number;
}

export interface DatasetInfo {
  dataset_id: string;
  task: string;
  name: string;
  raw_checksum: string;
  created_at: string;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export const TERMINAL_SUBMISSION_STATUSES = ["completed", "failed"];
export const TERMINAL_RUN_STATUSES = ["succeeded", "failed", "timeout", "output_invalid"];
export const MAX_ARCHIVE_BYTES = 256 * 1024 * 1024;

export function isTerminalSubmission(detail: SubmissionDetail): boolean {
  return TERMINAL_SUBMISSION_STATUSES.includes(detail.status);
}

/** Client-side archive size guard; returns an error message or null. */
export function archiveSizeError(sizeBytes: number): string | null {
  if (sizeBytes > MAX_ARCHIVE_BYTES) {
    return `archive is ${sizeBytes} bytes; the cap is ${MAX_ARCHIVE_BYTES}`;
  }
  return null;
}

async function parseError(resp: Response): Promise<ApiError> {
  let code = "http_error";
  let message = resp.statusText;
  try {
    const body = (await resp.json()) as { code?: string; message?: string };
    code = body.code ?? code;
    message = body.message ?? message;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(resp.status, code, message);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/v1${path}`);
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  leaderboard(task: string): Promise<LeaderboardEntry[]> {
    return this.getJson(`/leaderboard/${encodeURIComponent(task)}`);
  }

  submission(submissionId: string): Promise<SubmissionDetail> {
    return this.getJson(`/submissions/${encodeURIComponent(submissionId)}`);
  }

  datasets(task?: string): Promise<DatasetInfo[]> {
    const query = task ? `?task=${encodeURIComponent(task)}` : "";
    return this.getJson(`/datasets${query}`);
  }

  async runLogs(runId: string): Promise<string> {
    const resp = await this.fetchFn(
      `${this.baseUrl}/api/v1/runs/${encodeURIComponent(runId)}/logs`,
    );
    if (!resp.ok) throw await parseError(resp);
    return resp.text();
  }

  async submit(form: FormData): Promise<{ submission_id: string }> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/v1/submissions`, {
      method: "POST",
      body: form,
    });
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as { submission_id: string };
  }

  /** Stable download URL; the response carries an X-Content-Sha256 header. */
  codeDownloadUrl(submissionId: string): string {
    return `${this.baseUrl}/api/v1/submissions/${encodeURIComponent(submissionId)}/code`;
  }
}
