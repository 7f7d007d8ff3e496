// Client-side session state: enforces one feedback message per cycle,
// pauses the explanation while the user composes, and attaches typing
// telemetry to substantive feedback.

import type {
  ClientMessage,
  Polarity,
  QuestionType,
  ServerMessage,
} from "./protocol.js";
import { TelemetryAccumulator } from "./telemetry.js";

export interface Channel {
  send(message: ClientMessage): void;
}

export class FeedbackComposer {
  private sessionId: string | null = null;
  private feedbackArmed = false;
  private composing = false;
  private ended = false;
  private telemetry = new TelemetryAccumulator();

  /** Triples addressed by the latest agent turn (the question picker pool). */
  discussionTargets: string[] = [];

  constructor(private channel: Channel) {}

  /** Feeds every server message through; arms one feedback slot per turn. */
  onServerMessage(msg: ServerMessage): void {
    if (msg.type === "agent_turn") {
      this.sessionId = msg.session_id;
      this.feedbackArmed = true;
      this.discussionTargets = [...msg.payload.targets];
    } else if (msg.type === "session_end") {
      this.ended = true;
      this.feedbackArmed = false;
    }
  }

  get canSendFeedback(): boolean {
    return this.feedbackArmed && !this.ended && this.sessionId !== null;
  }

  get isComposing(): boolean {
    return this.composing;
  }

  /** Smiley click. Returns whether a message actually went out. */
  sendBackchannel(polarity: Polarity): boolean {
    if (!this.canSendFeedback || this.composing) return false;
    this.channel.send({
      type: "user_feedback",
      session_id: this.sessionId!,
      kind: polarity === "positive" ? "backchannel_positive" : "backchannel_negative",
    });
    this.feedbackArmed = false;
    return true;
  }

  /** Text box focus: the explanation pauses before any keystroke lands. */
  focusComposer(): void {
    if (this.composing || this.ended || this.sessionId === null) return;
    this.composing = true;
    this.telemetry.reset();
    this.channel.send({ type: "pause", session_id: this.sessionId });
  }

  keystroke(key: string, timestampMs: number): void {
    if (!this.composing) return;
    this.telemetry.keystroke(key, timestampMs);
  }

  /**
   * Submit the composed question. Empty text or an exhausted feedback slot
   * keeps the composer open and sends nothing.
   */
  submit(text: string, questionType: QuestionType, target: string,
         polarity: Polarity): boolean {
    if (!this.composing || this.sessionId === null) return false;
    if (text.trim() === "" || !this.canSendFeedback || !target) return false;
    const summary = this.telemetry.summarize(text.length);
    this.channel.send({
      type: "user_feedback",
      session_id: this.sessionId,
      kind: "substantive",
      question_type: questionType,
      target_triple: target,
      polarity,
      typing_time_per_char: summary.typing_time_per_char,
      deletions: summary.deletions,
      free_text: text,
    });
    this.feedbackArmed = false;
    this.composing = false;
    this.telemetry.reset();
    this.channel.send({ type: "resume", session_id: this.sessionId });
    return true;
  }

  /** Blur without submitting: telemetry is discarded, explanation resumes. */
  cancel(): void {
    if (!this.composing || this.sessionId === null) return;
    this.composing = false;
    this.telemetry.reset();
    this.channel.send({ type: "resume", session_id: this.sessionId });
  }
}
