// Turns the search form's fields into a query string the board's search
// grammar accepts. The form only composes conjunctions; readers who need
// OR or NOT type the query directly.

export interface SearchForm {
  text: string;
  minimums: Record<string, number>;
  minReviewers?: number;
}

const BARE_WORD_RE = /^\w+$/u;
const KEYWORDS = new Set(["AND", "OR", "NOT"]);

function clampGrade(value: number): number {
  const tenths = Math.round(value * 10);
  return Math.min(50, Math.max(10, tenths)) / 10;
}

function renderTerm(term: string): string {
  if (BARE_WORD_RE.test(term) && !KEYWORDS.has(term.toUpperCase())) {
    return term;
  }
  return `any:"${term.replace(/"/g, " ")}"`;
}

export function composeQuery(form: SearchForm): string {
  const parts: string[] = [];
  for (const term of form.text.split(/\s+/)) {
    if (term) parts.push(renderTerm(term));
  }
  for (const [dimension, minimum] of Object.entries(form.minimums)) {
    parts.push(`${dimension}>=${clampGrade(minimum).toFixed(1)}`);
  }
  if (form.minReviewers !== undefined && form.minReviewers > 0) {
    parts.push(`reviewers>=${Math.floor(form.minReviewers)}`);
  }
  // An empty form means "everything released".
  if (parts.length === 0) return "reviewers>=0";
  return parts.join(" AND ");
}
