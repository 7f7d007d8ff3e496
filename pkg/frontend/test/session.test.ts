import { beforeEach, describe, expect, it } from "vitest";

import type { AgentTurnMsg, ClientMessage, SessionEndMsg } from "../src/protocol.js";
import { FeedbackComposer } from "../src/session.js";

function agentTurn(cycle: number, targets = ["t1", "t2"]): AgentTurnMsg {
  return {
    type: "agent_turn",
    session_id: "s1",
    payload: { texts: ["..."], action: "provide", move: "comparison",
               targets, cycle },
  };
}

const sessionEnd: SessionEndMsg = {
  type: "session_end",
  session_id: "s1",
  payload: { done: true, length: 12 },
};

describe("FeedbackComposer", () => {
  let sent: ClientMessage[];
  let composer: FeedbackComposer;

  beforeEach(() => {
    sent = [];
    composer = new FeedbackComposer({ send: (m) => sent.push(m) });
    composer.onServerMessage(agentTurn(1));
  });

  it("emits pause before any keystroke is recorded", () => {
    composer.focusComposer();
    composer.keystroke("a", 100);
    composer.keystroke("b", 200);
    expect(sent[0]).toEqual({ type: "pause", session_id: "s1" });
    expect(sent).toHaveLength(1); // keystrokes themselves send nothing
  });

  it("ignores keystrokes before focus", () => {
    composer.keystroke("a", 100);
    composer.focusComposer();
    composer.keystroke("b", 1000);
    composer.keystroke("c", 2000);
    const ok = composer.submit("bc", "polar", "t1", "positive");
    expect(ok).toBe(true);
    const feedback = sent.find((m) => m.type === "user_feedback") as any;
    expect(feedback.typing_time_per_char).toBeCloseTo(1 / 2, 12);
  });

  it("submits substantive feedback with telemetry and resumes", () => {
    composer.focusComposer();
    "is it?".split("").forEach((key, i) => composer.keystroke(key, i * 500));
    const ok = composer.submit("is it?", "polar", "t2", "negative");
    expect(ok).toBe(true);
    expect(sent.map((m) => m.type)).toEqual(["pause", "user_feedback", "resume"]);
    const feedback = sent[1] as any;
    expect(feedback.kind).toBe("substantive");
    expect(feedback.question_type).toBe("polar");
    expect(feedback.target_triple).toBe("t2");
    expect(feedback.polarity).toBe("negative");
    // six keystrokes spanning 2500 ms over six characters
    expect(feedback.typing_time_per_char).toBeCloseTo(2.5 / 6, 12);
    expect(feedback.deletions).toBe(0);
  });

  it("keeps the composer open on empty submission", () => {
    composer.focusComposer();
    const ok = composer.submit("   ", "polar", "t1", "positive");
    expect(ok).toBe(false);
    expect(composer.isComposing).toBe(true);
    expect(sent.map((m) => m.type)).toEqual(["pause"]);
  });

  it("cancel discards telemetry and resumes", () => {
    composer.focusComposer();
    composer.keystroke("a", 0);
    composer.cancel();
    expect(sent.map((m) => m.type)).toEqual(["pause", "resume"]);
    // a new composition starts clean
    composer.onServerMessage(agentTurn(2));
    composer.focusComposer();
    composer.keystroke("b", 10_000);
    composer.keystroke("c", 11_000);
    composer.submit("bc", "open", "t1", "positive");
    const feedback = sent.find((m) => m.type === "user_feedback") as any;
    expect(feedback.typing_time_per_char).toBeCloseTo(0.5, 12);
    expect(feedback.deletions).toBe(0);
  });

  it("allows exactly one feedback message per cycle", () => {
    expect(composer.sendBackchannel("positive")).toBe(true);
    expect(composer.sendBackchannel("positive")).toBe(false);
    expect(composer.sendBackchannel("negative")).toBe(false);
    composer.focusComposer();
    composer.keystroke("x", 0);
    expect(composer.submit("x?", "polar", "t1", "positive")).toBe(false);
    composer.cancel();
    const feedbacks = sent.filter((m) => m.type === "user_feedback");
    expect(feedbacks).toHaveLength(1);
    // the next agent turn re-arms the slot
    composer.onServerMessage(agentTurn(2));
    expect(composer.sendBackchannel("negative")).toBe(true);
  });

  it("substantive feedback also consumes the cycle slot", () => {
    composer.focusComposer();
    composer.keystroke("x", 0);
    expect(composer.submit("x?", "polar", "t1", "positive")).toBe(true);
    expect(composer.sendBackchannel("positive")).toBe(false);
  });

  it("updates the question picker pool from the latest turn", () => {
    expect(composer.discussionTargets).toEqual(["t1", "t2"]);
    composer.onServerMessage(agentTurn(2, ["t9"]));
    expect(composer.discussionTargets).toEqual(["t9"]);
  });

  it("disables everything after session_end", () => {
    composer.onServerMessage(sessionEnd);
    expect(composer.sendBackchannel("positive")).toBe(false);
    composer.focusComposer();
    expect(composer.isComposing).toBe(false);
    expect(sent).toHaveLength(0);
  });
});
