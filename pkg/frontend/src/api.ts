// Typed client for the board's HTTP interface. Reads go through the public
// pages and the machine-readable search; writes carry a bearer token.

export interface TokenStore {
  get(): string;
  set(token: string): void;
}

// sessionStorage keeps the token out of persistent browser state.
export function browserTokenStore(storage: Storage): TokenStore {
  const KEY = "reviewboard-token";
  return {
    get: () => storage.getItem(KEY) ?? "",
    set: (token: string) => storage.setItem(KEY, token),
  };
}

export function memoryTokenStore(): TokenStore {
  let token = "";
  return {
    get: () => token,
    set: (value: string) => {
      token = value;
    },
  };
}

export class ApiError extends Error {
  status: number;
  code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.status = status;
    this.code = code;
  }
}

export interface SubmissionResult {
  recordId: string;
  state: string;
  replaced: boolean;
  urlVerified: boolean;
}

export interface ReleaseResult {
  recordId: string;
  state: string;
  releaseSeq: number;
}

export interface ReviewSubmission {
  paperUrl: string;
  paperTitle: string;
  authors: string[];
  institutions?: string[];
  abstract?: string;
  keywords?: string[];
  publicationDate?: string;
  grades: Record<string, number>;
  comment?: string;
}

export interface AuditEvent {
  seq: number;
  timestamp: string;
  actor: string;
  action: string;
  payload: Record<string, unknown>;
}

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) return;
  let code = "http-error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as { code?: string; message?: string };
    if (body.code) code = body.code;
    if (body.message) message = body.message;
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ApiError(response.status, code, message);
}

export class ApiClient {
  baseUrl: string;
  tokens: TokenStore;

  constructor(baseUrl: string, tokens?: TokenStore) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.tokens = tokens ?? memoryTokenStore();
  }

  private authHeaders(): Record<string, string> {
    const token = this.tokens.get();
    return token ? { authorization: `Bearer ${token}` } : {};
  }

  async searchRedif(query: string, limit = 50, offset = 0): Promise<string> {
    const params = new URLSearchParams({
      q: query,
      limit: String(limit),
      offset: String(offset),
      format: "redif",
    });
    const response = await fetch(`${this.baseUrl}/search?${params}`);
    await raiseForStatus(response);
    return response.text();
  }

  async criteriaPage(): Promise<string> {
    const response = await fetch(`${this.baseUrl}/criteria`);
    await raiseForStatus(response);
    return response.text();
  }

  async submitReview(review: ReviewSubmission): Promise<SubmissionResult> {
    const body: Record<string, unknown> = {
      "paper-url": review.paperUrl,
      "paper-title": review.paperTitle,
      "author-name": review.authors,
      "author-institution": review.institutions ?? [],
      "keyword": review.keywords ?? [],
      "abstract": review.abstract ?? "",
      "comment": review.comment ?? "",
    };
    if (review.publicationDate) body["publication-date"] = review.publicationDate;
    for (const [dimension, grade] of Object.entries(review.grades)) {
      body[`grade-${dimension}`] = grade;
    }
    const response = await fetch(`${this.baseUrl}/reviews`, {
      method: "POST",
      headers: { "content-type": "application/json", ...this.authHeaders() },
      body: JSON.stringify(body),
    });
    await raiseForStatus(response);
    const json = (await response.json()) as Record<string, unknown>;
    return {
      recordId: String(json["record-id"]),
      state: String(json["state"]),
      replaced: Boolean(json["replaced"]),
      urlVerified: Boolean(json["url-verified"]),
    };
  }

  async releaseRecord(recordId: string): Promise<ReleaseResult> {
    const response = await fetch(`${this.baseUrl}/records/${recordId}/release`, {
      method: "POST",
      headers: this.authHeaders(),
    });
    await raiseForStatus(response);
    const json = (await response.json()) as Record<string, unknown>;
    return {
      recordId: String(json["record-id"]),
      state: String(json["state"]),
      releaseSeq: Number(json["release-seq"]),
    };
  }

  async subscribe(contact: string, query: string): Promise<string> {
    const response = await fetch(`${this.baseUrl}/subscriptions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ contact, query }),
    });
    await raiseForStatus(response);
    const json = (await response.json()) as Record<string, unknown>;
    return String(json["subscription-id"]);
  }

  async unsubscribe(subscriptionId: string): Promise<void> {
    const response = await fetch(`${this.baseUrl}/subscriptions/${subscriptionId}`, {
      method: "DELETE",
    });
    await raiseForStatus(response);
  }

  async auditEvents(): Promise<AuditEvent[]> {
    const response = await fetch(`${this.baseUrl}/audit`, { headers: this.authHeaders() });
    await raiseForStatus(response);
    const json = (await response.json()) as { events: AuditEvent[] };
    return json.events;
  }
}

// The criteria page lists the board's dimensions as list items after the
// grading explanation; the release threshold appears in the closing line.
export function parseCriteria(pageHtml: string): { dimensions: string[]; minReviews: number } {
  const dimensions: string[] = [];
  const listMatch = /<ul>(.*?)<\/ul>/s.exec(pageHtml);
  if (listMatch) {
    for (const item of listMatch[1].matchAll(/<li>([^<]+)<\/li>/g)) {
      dimensions.push(item[1].trim());
    }
  }
  const minMatch = /Minimum reviews before release:\s*(\d+)/.exec(pageHtml);
  return { dimensions, minReviews: minMatch ? Number(minMatch[1]) : 0 };
}
