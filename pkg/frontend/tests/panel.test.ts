import { describe, expect, it } from "vitest";

import { ServiceClient } from "../src/api.js";
import { parseInput, ScorePanel } from "../src/panel.js";
import { deferredService, mockService, OFFLINE } from "./mock.js";

const BASE = "http://svc.test:8000";

function scoreReply(
  items: Array<Record<string, unknown>>,
  version = 1,
): Record<string, unknown> {
  return { results: items, model_version: version };
}

function feedbackReply(status: string, extra: Record<string, unknown> = {}) {
  return {
    status,
    buffer_size: 0,
    retrained: false,
    model_version: 1,
    ...extra,
  };
}

function panelWith(routes: Parameters<typeof mockService>[0]) {
  const mock = mockService(routes);
  return { mock, panel: new ScorePanel(new ServiceClient(BASE, mock.fetch)) };
}

describe("parseInput", () => {
  it("splits id lists on commas and whitespace", () => {
    expect(parseInput(" u1, u2\tu3 ")).toEqual({
      kind: "users",
      ids: ["u1", "u2", "u3"],
    });
  });

  it("treats tweet:<id> as a tweet reference", () => {
    expect(parseInput("tweet:t42")).toEqual({ kind: "tweet", tweetRef: "t42" });
  });

  it("takes the last path segment of a pasted link", () => {
    expect(parseInput("https://example.com/user/status/987?ref=x")).toEqual({
      kind: "tweet",
      tweetRef: "987",
    });
  });

  it("flags empty and blank input", () => {
    expect(parseInput("")).toEqual({ kind: "empty" });
    expect(parseInput("   ")).toEqual({ kind: "empty" });
    expect(parseInput("tweet:")).toEqual({ kind: "empty" });
  });
});

describe("ScorePanel.submitScore", () => {
  it("renders one row per response item", async () => {
    const { mock, panel } = panelWith({
      "POST /score": scoreReply(
        [
          { user_id: "u1", label: "genuine", confidence: 0.9 },
          { user_id: "u2", label: "customer", confidence: 0.6 },
          { user_id: "u3", label: "customer", confidence: 1.0 },
        ],
        5,
      ),
    });

    await panel.submitScore("u1 u2 u3");

    const state = panel.state;
    expect(state.rows).toHaveLength(3);
    expect(state.rows.map((r) => r.feedback)).toEqual(["None", "None", "None"]);
    expect(state.rows[1]).toMatchObject({
      userId: "u2",
      label: "customer",
      confidence: 0.6,
      error: null,
    });
    expect(state.modelVersion).toBe(5);
    expect(mock.count("POST /score")).toBe(1);
  });

  it("keeps not-found items as inline error rows", async () => {
    const { panel } = panelWith({
      "POST /score": scoreReply([
        { user_id: "u1", label: "genuine", confidence: 0.9 },
        { user_id: "ghost", error: "unknown user" },
        { user_id: "u2", label: "customer", confidence: 0.8 },
      ]),
    });

    await panel.submitScore("u1 ghost u2");

    const rows = panel.state.rows;
    expect(rows).toHaveLength(3);
    expect(rows.filter((r) => r.error === null)).toHaveLength(2);
    expect(rows[1]).toMatchObject({
      userId: "ghost",
      error: "unknown user",
      label: null,
    });
  });

  it("rejects empty input locally without any request", async () => {
    const { mock, panel } = panelWith({ "POST /score": scoreReply([]) });

    const sent = await panel.submitScore("   ");

    expect(sent).toBe(false);
    expect(panel.state.validation).toMatch(/enter a tweet reference/);
    expect(mock.calls).toHaveLength(0);
  });

  it("shows the offline banner and keeps previous rows on network failure", async () => {
    const { panel } = panelWith({
      "POST /score": [
        scoreReply([{ user_id: "u1", label: "genuine", confidence: 0.9 }]),
        OFFLINE,
      ],
    });

    await panel.submitScore("u1");
    await panel.submitScore("u2");

    const state = panel.state;
    expect(state.banner).toBe(`service unreachable at ${BASE}`);
    expect(state.rows).toHaveLength(1); // untouched by the failed request
    expect(state.rows[0]!.userId).toBe("u1");
    expect(state.busy).toBe(false);
  });

  it("surfaces 4xx detail as a validation message, not a banner", async () => {
    const { panel } = panelWith({
      "POST /score": {
        status: 404,
        body: { detail: "unknown tweet reference: 't9'" },
      },
    });

    await panel.submitScore("tweet:t9");

    expect(panel.state.validation).toBe("unknown tweet reference: 't9'");
    expect(panel.state.banner).toBeNull();
  });

  it("allows at most one score request in flight", async () => {
    const mock = deferredService("POST /score");
    const panel = new ScorePanel(new ServiceClient(BASE, mock.fetch));

    const first = panel.submitScore("u1");
    const second = await panel.submitScore("u2"); // while first is pending

    expect(second).toBe(false);
    mock.release(scoreReply([{ user_id: "u1", label: "genuine", confidence: 1 }]));
    expect(await first).toBe(true);
    expect(mock.count("POST /score")).toBe(1);
    expect(panel.state.rows[0]!.userId).toBe("u1");
  });

  it("clears the banner once the service answers again", async () => {
    const { panel } = panelWith({
      "POST /score": [
        OFFLINE,
        scoreReply([{ user_id: "u1", label: "genuine", confidence: 0.9 }]),
      ],
    });

    await panel.submitScore("u1");
    expect(panel.state.banner).not.toBeNull();

    await panel.submitScore("u1");
    expect(panel.state.banner).toBeNull();
    expect(panel.state.rows).toHaveLength(1);
  });
});

describe("ScorePanel.thumbsDown", () => {
  async function scoredPanel(feedback: Parameters<typeof mockService>[0][string]) {
    const { mock, panel } = panelWith({
      "POST /score": scoreReply([
        { user_id: "hi", label: "genuine", confidence: 0.9 },
        { user_id: "lo", label: "customer", confidence: 0.6 },
        { user_id: "ghost", error: "unknown user" },
      ]),
      "POST /feedback": feedback,
    });
    await panel.submitScore("hi lo ghost");
    return { mock, panel };
  }

  it("sends exactly one POST per click and mirrors an Accepted verdict", async () => {
    const { mock, panel } = await scoredPanel(feedbackReply("Accepted"));

    await panel.thumbsDown("lo");

    expect(mock.count("POST /feedback")).toBe(1);
    expect(mock.calls.at(-1)!.body).toEqual({
      user_id: "lo",
      predicted_label: "customer",
    });
    expect(panel.state.rows[1]!.feedback).toBe("Accepted");
  });

  it("mirrors an IgnoredHighConfidence verdict", async () => {
    const { panel } = await scoredPanel(feedbackReply("IgnoredHighConfidence"));

    await panel.thumbsDown("hi");

    expect(panel.state.rows[0]!.feedback).toBe("Ignored");
  });

  it("ignores a second click on an already-flagged row", async () => {
    const { mock, panel } = await scoredPanel(feedbackReply("Accepted"));

    await panel.thumbsDown("lo");
    const second = await panel.thumbsDown("lo");

    expect(second).toBe(false);
    expect(mock.count("POST /feedback")).toBe(1);
  });

  it("sends nothing while the first click is still in flight", async () => {
    const mock = deferredService("POST /feedback");
    const score = mockService({
      "POST /score": scoreReply([
        { user_id: "lo", label: "customer", confidence: 0.6 },
      ]),
    });
    const panel = new ScorePanel(
      new ServiceClient(BASE, async (url, init) =>
        new URL(url).pathname === "/score"
          ? score.fetch(url, init)
          : mock.fetch(url, init),
      ),
    );
    await panel.submitScore("lo");

    const first = panel.thumbsDown("lo");
    expect(panel.state.rows[0]!.feedback).toBe("Sent");
    const second = await panel.thumbsDown("lo");

    expect(second).toBe(false);
    mock.release(feedbackReply("Accepted"));
    await first;
    expect(mock.count("POST /feedback")).toBe(1);
    expect(panel.state.rows[0]!.feedback).toBe("Accepted");
  });

  it("never flags error rows or unknown ids", async () => {
    const { mock, panel } = await scoredPanel(feedbackReply("Accepted"));

    expect(await panel.thumbsDown("ghost")).toBe(false);
    expect(await panel.thumbsDown("nobody")).toBe(false);
    expect(mock.count("POST /feedback")).toBe(0);
  });

  it("returns the row to None with a retry notice on network failure", async () => {
    const { mock, panel } = await scoredPanel([
      OFFLINE,
      feedbackReply("Accepted"),
    ]);

    await panel.thumbsDown("lo");

    let row = panel.state.rows[1]!;
    expect(row.feedback).toBe("None");
    expect(row.notice).toMatch(/retry/);
    expect(panel.state.banner).not.toBeNull();

    await panel.thumbsDown("lo"); // the retry is a fresh click

    row = panel.state.rows[1]!;
    expect(row.feedback).toBe("Accepted");
    expect(mock.count("POST /feedback")).toBe(2);
  });

  it("announces a retrain triggered by the flag", async () => {
    const { panel } = await scoredPanel(
      feedbackReply("Accepted", { retrained: true, model_version: 2 }),
    );

    await panel.thumbsDown("lo");

    expect(panel.state.info).toMatch(/version 2/);
    expect(panel.state.modelVersion).toBe(2);
  });

  it("keeps unexpected verdicts clickable and shows them inline", async () => {
    const { panel } = await scoredPanel(feedbackReply("RejectedUnknownUser"));

    await panel.thumbsDown("lo");

    const row = panel.state.rows[1]!;
    expect(row.feedback).toBe("None");
    expect(row.notice).toBe("RejectedUnknownUser");
  });
});
