// DOM wiring and hash routing. All data flows through ApiClient; all markup
// comes from the pure renderers.

import {
  ApiClient,
  ApiError,
  LeaderboardEntry,
  SubmissionDetail,
  archiveSizeError,
  isTerminalSubmission,
} from "./api.js";
import { startPolling, PollHandle } from "./poll.js";
import {
  LeaderboardViewState,
  SortKey,
  renderDatasets,
  renderLeaderboard,
  renderRunTable,
  renderSubmitForm,
} from "./render.js";

const api = new ApiClient("");
const app = document.querySelector<HTMLDivElement>("#app");
let activePoll: PollHandle | null = null;

function stopPolling(): void {
  activePoll?.stop();
  activePoll = null;
}

function setContent(html: string): void {
  if (app) app.innerHTML = html;
}

function navBar(active: string): string {
  const links = [
    ["#/leaderboard/ctr", "ctr"],
    ["#/leaderboard/topn", "topn"],
    ["#/datasets", "datasets"],
    ["#/submit", "submit"],
  ];
  return `<nav>${links
    .map(
      ([href, label]) =>
        `<a href="${href}" class="${active === label ? "active" : ""}">${label}</a>`,
    )
    .join(" ")}</nav>`;
}

async function showLeaderboard(task: string, state?: Partial<LeaderboardViewState>) {
  const viewState: LeaderboardViewState = {
    task,
    expanded: state?.expanded ?? null,
    sort: state?.sort ?? "api",
  };
  let entries: LeaderboardEntry[] = [];
  try {
    entries = await api.leaderboard(task);
  } catch (error) {
    setContent(navBar(task) + errorBox(error));
    return;
  }
  setContent(
    navBar(task) +
      sortControls(viewState.sort) +
      renderLeaderboard(entries, viewState),
  );
  document.querySelectorAll<HTMLButtonElement>("button.toggle").forEach((btn) => {
    btn.onclick = () => {
      const id = btn.dataset.submission ?? null;
      void showLeaderboard(task, {
        ...viewState,
        expanded: viewState.expanded === id ? null : id,
      });
    };
  });
  document.querySelectorAll<HTMLButtonElement>("button.sort").forEach((btn) => {
    btn.onclick = () =>
      void showLeaderboard(task, { ...viewState, sort: btn.dataset.sort as SortKey });
  });
}

function sortControls(active: SortKey): string {
  const options: [SortKey, string][] = [
    ["api", "rank"],
    ["author", "author"],
    ["runtime", "runtime"],
  ];
  return `<div class="sort">sort: ${options
    .map(
      ([key, label]) =>
        `<button class="sort ${active === key ? "active" : ""}" data-sort="${key}">${label}</button>`,
    )
    .join(" ")}</div>`;
}

async function showSubmission(submissionId: string) {
  const render = (detail: SubmissionDetail) => {
    setContent(navBar("") + renderRunTable(detail));
    document.querySelectorAll<HTMLButtonElement>("button.show-logs").forEach((btn) => {
      btn.onclick = async () => {
        const viewer = document.querySelector<HTMLPreElement>("#log-viewer");
        if (!viewer || !btn.dataset.run) return;
        viewer.hidden = false;
        viewer.textContent = await api.runLogs(btn.dataset.run);
      };
    });
  };
  stopPolling();
  activePoll = startPolling(() => api.submission(submissionId), {
    isTerminal: isTerminalSubmission,
    onUpdate: render,
    onError: (error) => setContent(navBar("") + errorBox(error)),
  });
}

async function showDatasets() {
  try {
    setContent(navBar("datasets") + renderDatasets(await api.datasets()));
  } catch (error) {
    setContent(navBar("datasets") + errorBox(error));
  }
}

function showSubmitForm() {
  setContent(navBar("submit") + renderSubmitForm());
  const form = document.querySelector<HTMLFormElement>("#submit-form");
  if (!form) return;
  form.onsubmit = async (event) => {
    event.preventDefault();
    const errorBoxEl = document.querySelector<HTMLParagraphElement>("#submit-error");
    const data = new FormData(form);
    const archive = data.get("archive");
    if (archive instanceof File) {
      const sizeProblem = archiveSizeError(archive.size);
      if (sizeProblem) {
        // blocked client-side; nothing is uploaded
        if (errorBoxEl) {
          errorBoxEl.hidden = false;
          errorBoxEl.textContent = sizeProblem;
        }
        return;
      }
    }
    try {
      const { submission_id } = await api.submit(data);
      window.location.hash = `#/submission/${submission_id}`;
    } catch (error) {
      if (errorBoxEl) {
        errorBoxEl.hidden = false;
        errorBoxEl.textContent =
          error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
      }
    }
  };
}

function errorBox(error: unknown): string {
  const text =
    error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
  return `<p class="error">${text.replace(/</g, "&lt;")}</p>`;
}

function route(): void {
  stopPolling();
  const hash = window.location.hash || "#/leaderboard/ctr";
  const submission = hash.match(/^#\/submission\/(.+)$/);
  const leaderboard = hash.match(/^#\/leaderboard\/(\w+)$/);
  if (submission) {
    void showSubmission(decodeURIComponent(submission[1]));
  } else if (leaderboard) {
    void showLeaderboard(leaderboard[1]);
  } else if (hash === "#/datasets") {
    void showDatasets();
  } else if (hash === "#/submit") {
    showSubmitForm();
  } else {
    void showLeaderboard("ctr");
  }
}

window.addEventListener("hashchange", route);
route();
