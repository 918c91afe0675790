// Single-page client for a review board: reader search, reviewer submission
// form, and the editor's release queue. Talks only to the board's HTTP
// interface; the queue view is derived from the audit trail, so it needs an
// editor or admin token.

import {
  ApiClient,
  ApiError,
  AuditEvent,
  browserTokenStore,
  parseCriteria,
} from "./api.js";
import { composeQuery, SearchForm } from "./query.js";
import { allFields, firstField, gradeAverages, parseRedif } from "./redif.js";

export interface QueueRow {
  recordId: string;
  title: string;
  reviewers: number;
  released: boolean;
  updatedSinceRelease: boolean;
}

// Replays the audit trail into the editor's work list: records that were
// never released, plus released records with review activity after the
// last release. Whether a row is actually releasable is the server's call.
export function deriveQueue(events: AuditEvent[]): QueueRow[] {
  interface Tracker {
    title: string;
    reviewers: Set<string>;
    lastReviewSeq: number;
    lastReleaseSeq: number;
  }
  const trackers = new Map<string, Tracker>();
  for (const event of events) {
    if (event.action === "REVIEW_SUBMITTED" || event.action === "REVIEW_REPLACED") {
      const recordId = String(event.payload["record_id"]);
      let tracker = trackers.get(recordId);
      if (!tracker) {
        const paper = event.payload["paper"] as { title?: string } | undefined;
        tracker = {
          title: paper?.title ?? recordId,
          reviewers: new Set(),
          lastReviewSeq: 0,
          lastReleaseSeq: 0,
        };
        trackers.set(recordId, tracker);
      }
      tracker.reviewers.add(String(event.payload["reviewer_id"]));
      tracker.lastReviewSeq = event.seq;
    } else if (event.action === "RECORD_RELEASED") {
      const tracker = trackers.get(String(event.payload["record_id"]));
      if (tracker) tracker.lastReleaseSeq = event.seq;
    }
  }
  const rows: QueueRow[] = [];
  for (const [recordId, tracker] of trackers) {
    const released = tracker.lastReleaseSeq > 0;
    const updated = released && tracker.lastReviewSeq > tracker.lastReleaseSeq;
    if (!released || updated) {
      rows.push({
        recordId,
        title: tracker.title,
        reviewers: tracker.reviewers.size,
        released,
        updatedSinceRelease: updated,
      });
    }
  }
  rows.sort((a, b) => (a.recordId < b.recordId ? -1 : 1));
  return rows;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  for (const [name, value] of Object.entries(attrs)) {
    node.setAttribute(name, value);
  }
  if (text) node.textContent = text;
  return node;
}

function showError(status: HTMLElement, err: unknown): void {
  status.className = "status error";
  if (err instanceof ApiError) {
    status.textContent = `${err.status} ${err.code}: ${err.message}`;
  } else {
    status.textContent = String(err);
  }
}

export function initApp(root: HTMLElement, api: ApiClient): void {
  const doc = root.ownerDocument;
  root.textContent = "";

  const nav = el(doc, "nav");
  const tokenInput = el(doc, "input", {
    id: "token",
    type: "password",
    placeholder: "access token",
  });
  tokenInput.value = api.tokens.get();
  tokenInput.addEventListener("change", () => api.tokens.set(tokenInput.value.trim()));
  const content = el(doc, "main", { id: "content" });

  const views: Array<[string, string, (target: HTMLElement) => void]> = [
    ["nav-search", "Search", (t) => renderSearchView(t, api)],
    ["nav-submit", "Submit review", (t) => renderSubmitView(t, api)],
    ["nav-queue", "Release queue", (t) => void renderQueueView(t, api)],
  ];
  for (const [id, label, render] of views) {
    const button = el(doc, "button", { id, type: "button" }, label);
    button.addEventListener("click", () => render(content));
    nav.appendChild(button);
  }
  nav.appendChild(tokenInput);
  root.appendChild(nav);
  root.appendChild(content);
  renderSearchView(content, api);
}

// -- reader search ----------------------------------------------------------

let dimensionsCache: string[] | null = null;

async function boardDimensions(api: ApiClient): Promise<string[]> {
  if (dimensionsCache === null) {
    dimensionsCache = parseCriteria(await api.criteriaPage()).dimensions;
  }
  return dimensionsCache;
}

export function renderSearchView(content: HTMLElement, api: ApiClient): void {
  const doc = content.ownerDocument;
  content.textContent = "";
  content.appendChild(el(doc, "h1", {}, "Search reviewed papers"));

  const form = el(doc, "form", { id: "search-form" });
  const textInput = el(doc, "input", {
    id: "search-text",
    type: "text",
    placeholder: "words to look for",
  });
  form.appendChild(textInput);
  const selectorBox = el(doc, "span", { id: "grade-selectors" });
  form.appendChild(selectorBox);
  const reviewersInput = el(doc, "input", {
    id: "min-reviewers",
    type: "number",
    min: "0",
    value: "0",
  });
  form.appendChild(el(doc, "label", {}, "min reviewers"));
  form.appendChild(reviewersInput);
  const searchButton = el(doc, "button", { id: "search-go", type: "submit" }, "Search");
  form.appendChild(searchButton);
  content.appendChild(form);

  const queryEcho = el(doc, "p", { id: "query-echo" });
  const results = el(doc, "div", { id: "results" });
  content.appendChild(queryEcho);
  content.appendChild(results);

  const subForm = el(doc, "form", { id: "subscribe-form" });
  subForm.appendChild(el(doc, "label", {}, "alert me about new matches:"));
  const contactInput = el(doc, "input", {
    id: "subscribe-contact",
    type: "email",
    placeholder: "you@example.org",
  });
  subForm.appendChild(contactInput);
  subForm.appendChild(el(doc, "button", { id: "subscribe-go", type: "submit" }, "Subscribe"));
  const subStatus = el(doc, "p", { id: "subscribe-status", class: "status" });
  subForm.appendChild(subStatus);
  content.appendChild(subForm);

  const selects = new Map<string, HTMLSelectElement>();
  void boardDimensions(api).then((dimensions) => {
    for (const dimension of dimensions) {
      const select = el(doc, "select", { id: `min-${dimension}` });
      select.appendChild(el(doc, "option", { value: "" }, "any"));
      for (let grade = 1; grade <= 5; grade++) {
        select.appendChild(el(doc, "option", { value: String(grade) }, `≥ ${grade}`));
      }
      selectorBox.appendChild(el(doc, "label", {}, dimension));
      selectorBox.appendChild(select);
      selects.set(dimension, select);
    }
  });

  function currentForm(): SearchForm {
    const minimums: Record<string, number> = {};
    for (const [dimension, select] of selects) {
      if (select.value) minimums[dimension] = Number(select.value);
    }
    return {
      text: textInput.value,
      minimums,
      minReviewers: Number(reviewersInput.value) || 0,
    };
  }

  async function runSearch(): Promise<void> {
    const query = composeQuery(currentForm());
    queryEcho.textContent = `Query: ${query}`;
    results.textContent = "";
    try {
      const records = parseRedif(await api.searchRedif(query));
      if (records.length === 0) {
        results.appendChild(el(doc, "p", { class: "no-matches" }, "No matching records."));
        return;
      }
      for (const record of records) {
        const row = el(doc, "div", { class: "record" });
        const link = el(
          doc,
          "a",
          { class: "paper-link", href: firstField(record, "paper-url") ?? "#" },
          firstField(record, "paper-title") ?? "(untitled)",
        );
        row.appendChild(link);
        for (const [dimension, average] of gradeAverages(record)) {
          row.appendChild(el(doc, "span", { class: "badge" }, `${dimension} ${average}`));
        }
        const reviewers = firstField(record, "number-of-reviewers") ?? "?";
        row.appendChild(el(doc, "span", { class: "reviewers" }, `${reviewers} reviewer(s)`));
        const comments = allFields(record, "comment").length;
        row.appendChild(el(doc, "span", { class: "comments" }, `${comments} comment(s)`));
        results.appendChild(row);
      }
    } catch (err) {
      const status = el(doc, "p", { class: "status" });
      showError(status, err);
      results.appendChild(status);
    }
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void runSearch();
  });

  subForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const query = composeQuery(currentForm());
    api
      .subscribe(contactInput.value.trim(), query)
      .then((id) => {
        subStatus.className = "status ok";
        subStatus.textContent = `Subscribed (id ${id}) to: ${query}`;
      })
      .catch((err) => showError(subStatus, err));
  });
}

// -- reviewer submission form -------------------------------------------------

export function renderSubmitView(content: HTMLElement, api: ApiClient): void {
  const doc = content.ownerDocument;
  content.textContent = "";
  content.appendChild(el(doc, "h1", {}, "Submit a review"));

  const form = el(doc, "form", { id: "review-form" });
  const urlInput = el(doc, "input", { id: "paper-url", type: "url", placeholder: "paper URL" });
  const titleInput = el(doc, "input", { id: "paper-title", type: "text", placeholder: "title" });
  const authorsInput = el(doc, "textarea", {
    id: "author-names",
    placeholder: "one author per line, Family, Given",
  });
  const keywordsInput = el(doc, "input", {
    id: "keywords",
    type: "text",
    placeholder: "keywords, comma separated",
  });
  const abstractInput = el(doc, "textarea", { id: "abstract", placeholder: "abstract" });
  const commentInput = el(doc, "textarea", { id: "comment", placeholder: "public comment" });
  for (const [label, field] of [
    ["Paper URL", urlInput],
    ["Title", titleInput],
    ["Authors", authorsInput],
    ["Keywords", keywordsInput],
    ["Abstract", abstractInput],
  ] as Array<[string, HTMLElement]>) {
    form.appendChild(el(doc, "label", {}, label));
    form.appendChild(field);
  }

  const gradeSelects = new Map<string, HTMLSelectElement>();
  const gradeBox = el(doc, "div", { id: "grades" });
  form.appendChild(gradeBox);
  form.appendChild(el(doc, "label", {}, "Comment"));
  form.appendChild(commentInput);

  const submitButton = el(doc, "button", { id: "review-go", type: "submit" }, "Submit review");
  submitButton.disabled = true;
  form.appendChild(submitButton);
  const status = el(doc, "p", { id: "review-status", class: "status" });
  form.appendChild(status);
  content.appendChild(form);

  function refreshDisabled(): void {
    const allGraded = [...gradeSelects.values()].every((select) => select.value !== "");
    const authors = authorsInput.value.split("\n").some((line) => line.trim() !== "");
    submitButton.disabled = !(
      urlInput.value.trim() !== "" &&
      titleInput.value.trim() !== "" &&
      authors &&
      gradeSelects.size > 0 &&
      allGraded
    );
  }

  void boardDimensions(api).then((dimensions) => {
    for (const dimension of dimensions) {
      const select = el(doc, "select", { id: `grade-${dimension}` });
      select.appendChild(el(doc, "option", { value: "" }, "ungraded"));
      for (let grade = 1; grade <= 5; grade++) {
        select.appendChild(el(doc, "option", { value: String(grade) }, String(grade)));
      }
      select.addEventListener("change", refreshDisabled);
      gradeBox.appendChild(el(doc, "label", {}, dimension));
      gradeBox.appendChild(select);
      gradeSelects.set(dimension, select);
    }
    refreshDisabled();
  });
  for (const field of [urlInput, titleInput, authorsInput]) {
    field.addEventListener("input", refreshDisabled);
    field.addEventListener("change", refreshDisabled);
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const grades: Record<string, number> = {};
    for (const [dimension, select] of gradeSelects) {
      grades[dimension] = Number(select.value);
    }
    api
      .submitReview({
        paperUrl: urlInput.value.trim(),
        paperTitle: titleInput.value.trim(),
        authors: authorsInput.value
          .split("\n")
          .map((line) => line.trim())
          .filter((line) => line !== ""),
        keywords: keywordsInput.value
          .split(",")
          .map((word) => word.trim())
          .filter((word) => word !== ""),
        abstract: abstractInput.value.trim(),
        grades,
        comment: commentInput.value.trim(),
      })
      .then((outcome) => {
        status.className = "status ok";
        const note = outcome.replaced ? "replaced earlier review" : "recorded";
        status.textContent = `Review ${note}: record ${outcome.recordId} is ${outcome.state}`;
      })
      .catch((err) => showError(status, err));
  });
}

// -- editor release queue ------------------------------------------------------

export async function renderQueueView(content: HTMLElement, api: ApiClient): Promise<void> {
  const doc = content.ownerDocument;
  content.textContent = "";
  content.appendChild(el(doc, "h1", {}, "Release queue"));
  const status = el(doc, "p", { id: "queue-status", class: "status" });
  content.appendChild(status);
  const table = el(doc, "table", { id: "queue" });
  content.appendChild(table);

  let events: AuditEvent[];
  try {
    events = await api.auditEvents();
  } catch (err) {
    showError(status, err);
    return;
  }

  const rows = deriveQueue(events);
  if (rows.length === 0) {
    status.textContent = "Nothing awaiting release.";
    return;
  }
  for (const row of rows) {
    const tr = el(doc, "tr", { class: "queue-row", "data-record": row.recordId });
    tr.appendChild(el(doc, "td", {}, row.title));
    tr.appendChild(el(doc, "td", {}, `${row.reviewers} reviewer(s)`));
    tr.appendChild(
      el(doc, "td", {}, row.updatedSinceRelease ? "updated since release" : "never released"),
    );
    const cell = el(doc, "td");
    const button = el(doc, "button", { class: "release", type: "button" }, "Release");
    button.addEventListener("click", () => {
      api
        .releaseRecord(row.recordId)
        .then((outcome) => {
          status.className = "status ok";
          status.textContent = `Released ${outcome.recordId} (release ${outcome.releaseSeq})`;
          // Redraw from the server's audit trail, never optimistically.
          void renderQueueView(content, api);
        })
        .catch((err) => showError(status, err));
    });
    cell.appendChild(button);
    tr.appendChild(cell);
    table.appendChild(tr);
  }
}

declare global {
  interface Window {
    BOARD_URL?: string;
  }
}

if (typeof document !== "undefined" && typeof window !== "undefined") {
  const root = document.getElementById("app");
  if (root) {
    const base = window.BOARD_URL || window.location.origin;
    initApp(root, new ApiClient(base, browserTokenStore(window.sessionStorage)));
  }
}
