// Pure view rendering: payloads in, HTML strings out. Every data cell carries
// a data-value attribute with the raw API value so the contract tests (and
// anyone auditing the UI) can trace each displayed number to its API field.

import {
  DatasetInfo,
  LeaderboardEntry,
  RunInfo,
  SubmissionDetail,
} from "./api.js";

export function escapeHtml(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function cell(field: string, raw: unknown, text: string): string {
  const value = escapeHtml(JSON.stringify(raw ?? null));
  return `<td data-field="${field}" data-value="${value}">${escapeHtml(text)}</td>`;
}

function formatNumber(value: number | null): string {
  if (value === null) return "-";
  return Number.isInteger(value) ? String(value) : value.toFixed(4);
}

export type SortKey = "api" | "author" | "runtime";

export interface LeaderboardViewState {
  task: string;
  expanded: string | null; // submission_id with per-dataset columns open
  sort: SortKey; // presentation-only reordering of API entries
}

function sortEntries(entries: LeaderboardEntry[], sort: SortKey): LeaderboardEntry[] {
  const copy = [...entries];
  if (sort === "author") {
    copy.sort((a, b) => a.author.localeCompare(b.author));
  } else if (sort === "runtime") {
    copy.sort((a, b) => a.total_runtime_seconds - b.total_runtime_seconds);
  }
  return copy; // "api": the server's display order, untouched
}

export function renderLeaderboard(
  entries: LeaderboardEntry[],
  state: LeaderboardViewState,
): string {
  if (entries.length === 0) {
    return `<p class="empty">No entries yet for task ${escapeHtml(state.task)}.</p>`;
  }
  const ordered = sortEntries(entries, state.sort);
  const rows = ordered
    .map((entry, index) => {
      const expanded = state.expanded === entry.submission_id;
      const main = `<tr class="entry ${entry.eligible ? "" : "ineligible"}" data-submission="${escapeHtml(entry.submission_id)}">
  <td class="position">${index + 1}</td>
  ${cell("author", entry.author, entry.author)}
  ${cell("submission_id", entry.submission_id, entry.submission_id)}
  ${cell("mean_rank", entry.mean_rank, formatNumber(entry.mean_rank))}
  ${cell("total_runtime_seconds", entry.total_runtime_seconds, formatNumber(entry.total_runtime_seconds))}
  ${cell("eligible", entry.eligible, entry.eligible ? "yes" : "no")}
  <td><button class="toggle" data-submission="${escapeHtml(entry.submission_id)}">${expanded ? "hide" : "datasets"}</button>
      <a href="#/submission/${escapeHtml(entry.submission_id)}">runs</a></td>
</tr>`;
      return expanded ? main + renderPerDatasetRows(entry) : main;
    })
    .join("\n");
  return `<table class="leaderboard" data-task="${escapeHtml(state.task)}">
<thead><tr><th>#</th><th>author</th><th>submission</th><th>mean rank</th><th>runtime (s)</th><th>eligible</th><th></th></tr></thead>
<tbody>
${rows}
</tbody>
</table>`;
}

function renderPerDatasetRows(entry: LeaderboardEntry): string {
  const datasets = Object.keys(entry.per_dataset).sort();
  const rows = datasets
    .map((datasetId) => {
      const per = entry.per_dataset[datasetId];
      const metricCells = Object.entries(per.metrics ?? {})
        .sort(([a], [b]) => a.localeCompare(b))
        .map(([name, value]) =>
          cell(`metric:${name}`, value, `${name}=${formatNumber(value)}`),
        )
        .join("");
      return `<tr class="per-dataset" data-submission="${escapeHtml(entry.submission_id)}" data-dataset="${escapeHtml(datasetId)}">
  ${cell("dataset_id", datasetId, datasetId)}
  ${cell("rank", per.rank, per.rank === null ? "-" : String(per.rank))}
  ${cell("wall_clock_seconds", per.wall_clock_seconds, formatNumber(per.wall_clock_seconds))}
  ${metricCells}
</tr>`;
    })
    .join("\n");
  return rows;
}

const STATUS_BADGES: Record<string, string> = {
  queued: "queued",
  running: "running…",
  succeeded: "succeeded",
  failed: "failed",
  timeout: "timeout",
  output_invalid: "output invalid",
};

export function renderRunTable(detail: SubmissionDetail): string {
  const rows = detail.runs
    .map((run) => {
      const metricCells = Object.entries(run.metrics ?? {})
        .sort(([a], [b]) => a.localeCompare(b))
        .map(([name, value]) =>
          cell(`metric:${name}`, value, `${name}=${formatNumber(value)}`),
        )
        .join("");
      return `<tr class="run status-${escapeHtml(run.status)}" data-run="${escapeHtml(run.run_id)}">
  ${cell("dataset_id", run.dataset_id, run.dataset_id)}
  ${cell("status", run.status, badgeFor(run))}
  ${cell("wall_clock_seconds", run.wall_clock_seconds, formatNumber(run.wall_clock_seconds))}
  ${cell("exit_code", run.exit_code, run.exit_code === null ? "-" : String(run.exit_code))}
  ${metricCells}
  <td>${showLogsButton(run)}</td>
</tr>`;
    })
    .join("\n");
  return `<section class="submission" data-submission="${escapeHtml(detail.submission_id)}">
<h2>${escapeHtml(detail.submission_id)} <span class="status">${escapeHtml(detail.status)}</span></h2>
<p>${escapeHtml(detail.author)} · task ${escapeHtml(detail.task)} · submitted ${escapeHtml(detail.submitted_at)}
 · <a class="code-download" href="/api/v1/submissions/${escapeHtml(detail.submission_id)}/code" download>download code</a></p>
<table class="runs">
<thead><tr><th>dataset</th><th>status</th><th>seconds</th><th>exit</th><th colspan="4">metrics</th><th></th></tr></thead>
<tbody>
${rows}
</tbody>
</table>
<pre class="log-viewer" id="log-viewer" hidden></pre>
</section>`;
}

function badgeFor(run: RunInfo): string {
  const badge = STATUS_BADGES[run.status] ?? run.status;
  if (run.status === "timeout" && run.wall_clock_seconds !== null) {
    // the measured wall clock is bounded by the configured limit plus grace
    return `${badge} after ${formatNumber(run.wall_clock_seconds)}s`;
  }
  return badge;
}

function showLogsButton(run: RunInfo): string {
  if (run.status === "queued") return "";
  return `<button class="show-logs" data-run="${escapeHtml(run.run_id)}">logs</button>`;
}

export function renderDatasets(datasets: DatasetInfo[]): string {
  if (datasets.length === 0) return `<p class="empty">No datasets registered.</p>`;
  const rows = datasets
    .map(
      (d) => `<tr data-dataset="${escapeHtml(d.dataset_id)}">
  ${cell("dataset_id", d.dataset_id, d.dataset_id)}
  ${cell("task", d.task, d.task)}
  ${cell("name", d.name, d.name)}
  <td><a href="/api/v1/datasets/${escapeHtml(d.dataset_id)}/bundle" download>bundle</a></td>
</tr>`,
    )
    .join("\n");
  return `<table class="datasets">
<thead><tr><th>id</th><th>task</th><th>name</th><th></th></tr></thead>
<tbody>
${rows}
</tbody>
</table>`;
}

export function renderSubmitForm(tasks: string[] = ["ctr", "topn"]): string {
  const options = tasks
    .map((t) => `<option value="${escapeHtml(t)}">${escapeHtml(t)}</option>`)
    .join("");
  return `<form id="submit-form" class="submit">
  <label>task <select name="task">${options}</select></label>
  <label>author <input name="author" required></label>
  <label>token <input name="token" type="password" required></label>
  <label>archive (zip with main.py at root) <input name="archive" type="file" accept=".zip" required></label>
  <button type="submit">submit</button>
  <p class="error" id="submit-error" hidden></p>
</form>`;
}
