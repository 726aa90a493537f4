// Review-panel state machine. All service traffic goes through ServiceClient;
// every method resolves after the state has settled, so the UI layer only
// re-renders `state` and never tracks promises itself.

import { ServiceClient, ServiceError } from "./api.js";

export type FeedbackState = "None" | "Sent" | "Ignored" | "Accepted";

export interface ScoredRow {
  userId: string;
  label: string | null;
  confidence: number | null;
  error: string | null; // inline per-item error from the score response
  feedback: FeedbackState;
  notice: string | null; // retry prompt or unexpected verdict, shown inline
}

export interface PanelState {
  rows: ScoredRow[];
  busy: boolean; // a score request is in flight
  banner: string | null; // service unreachable
  validation: string | null; // input problem, nothing was sent
  info: string | null; // e.g. the feedback loop retrained the model
  modelVersion: number | null;
}

export type ParsedInput =
  | { kind: "tweet"; tweetRef: string }
  | { kind: "users"; ids: string[] }
  | { kind: "empty" };

/** `tweet:<id>` or a pasted link names a tweet; anything else is an id list. */
export function parseInput(text: string): ParsedInput {
  const trimmed = text.trim();
  if (trimmed === "") return { kind: "empty" };
  if (trimmed.startsWith("tweet:")) {
    const ref = trimmed.slice("tweet:".length).trim();
    return ref === "" ? { kind: "empty" } : { kind: "tweet", tweetRef: ref };
  }
  if (/^https?:\/\//i.test(trimmed)) {
    const segments = trimmed.split("?")[0]!.split("/").filter((s) => s !== "");
    const last = segments[segments.length - 1] ?? "";
    return last === "" ? { kind: "empty" } : { kind: "tweet", tweetRef: last };
  }
  const ids = trimmed.split(/[\s,]+/).filter((s) => s !== "");
  return ids.length === 0 ? { kind: "empty" } : { kind: "users", ids };
}

const EMPTY_INPUT_MESSAGE =
  "enter a tweet reference (tweet:<id> or a link) or retweeter ids";

export class ScorePanel {
  private rows: ScoredRow[] = [];
  private busy = false;
  private banner: string | null = null;
  private validation: string | null = null;
  private info: string | null = null;
  private modelVersion: number | null = null;

  constructor(private readonly client: ServiceClient) {}

  get state(): PanelState {
    return {
      rows: this.rows.map((row) => ({ ...row })),
      busy: this.busy,
      banner: this.banner,
      validation: this.validation,
      info: this.info,
      modelVersion: this.modelVersion,
    };
  }

  /** Score the pasted input. Returns false when nothing was sent. */
  async submitScore(text: string): Promise<boolean> {
    if (this.busy) return false; // at most one score request in flight
    const parsed = parseInput(text);
    if (parsed.kind === "empty") {
      this.validation = EMPTY_INPUT_MESSAGE;
      return false;
    }
    this.busy = true;
    this.validation = null;
    this.info = null;
    try {
      const response = await this.client.score(
        parsed.kind === "tweet"
          ? { tweetRef: parsed.tweetRef }
          : { retweeterIds: parsed.ids },
      );
      this.rows = response.results.map((item) => ({
        userId: item.user_id,
        label: item.label ?? null,
        confidence: item.confidence ?? null,
        error: item.error ?? null,
        feedback: "None",
        notice: null,
      }));
      this.modelVersion = response.model_version;
      this.banner = null;
      return true;
    } catch (exc) {
      // reachable service refused the input vs. no service at all; either
      // way the previous rows stay untouched
      if (exc instanceof ServiceError) {
        this.validation = exc.message;
      } else {
        this.banner = `service unreachable at ${this.client.baseUrl}`;
      }
      return false;
    } finally {
      this.busy = false;
    }
  }

  /**
   * Flag one row as mislabeled. Exactly one POST per call that accepts;
   * rows that already carry a verdict, are mid-flight, or were error rows
   * send nothing.
   */
  async thumbsDown(userId: string): Promise<boolean> {
    const row = this.rows.find((r) => r.userId === userId);
    if (!row || row.feedback !== "None" || row.label === null) return false;
    row.feedback = "Sent";
    row.notice = null;
    try {
      const response = await this.client.sendFeedback(userId, row.label);
      if (response.status === "Accepted") {
        row.feedback = "Accepted";
      } else if (response.status === "IgnoredHighConfidence") {
        row.feedback = "Ignored";
      } else {
        row.feedback = "None";
        row.notice = response.status;
      }
      this.modelVersion = response.model_version;
      if (response.retrained) {
        this.info = `model retrained, now version ${response.model_version}`;
      }
      this.banner = null;
      return true;
    } catch (exc) {
      row.feedback = "None"; // retry allowed
      if (exc instanceof ServiceError) {
        row.notice = exc.message;
      } else {
        row.notice = "network error, click to retry";
        this.banner = `service unreachable at ${this.client.baseUrl}`;
      }
      return false;
    }
  }
}
