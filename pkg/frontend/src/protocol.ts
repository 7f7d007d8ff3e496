// Wire contract with the session service. Field names are normative.

export type FeedbackKind =
  | "none"
  | "backchannel_positive"
  | "backchannel_negative"
  | "substantive";

export type QuestionType = "polar" | "open";
export type Polarity = "positive" | "negative";

export interface AgentTurnMsg {
  type: "agent_turn";
  session_id: string;
  payload: {
    texts: string[];
    action: string;
    move: string;
    targets: string[];
    cycle: number;
  };
}

export interface PmSnapshotMsg {
  type: "pm_snapshot";
  session_id: string;
  payload: { e: number; l: number; a: number; c: number };
}

export interface SessionEndMsg {
  type: "session_end";
  session_id: string;
  payload: { done: boolean; length: number };
}

export interface ErrorMsg {
  type: "error";
  session_id?: string | null;
  payload: { message: string };
}

export type ServerMessage = AgentTurnMsg | PmSnapshotMsg | SessionEndMsg | ErrorMsg;

export interface UserFeedbackMsg {
  type: "user_feedback";
  session_id: string;
  kind: FeedbackKind;
  question_type?: QuestionType;
  target_triple?: string;
  polarity?: Polarity;
  typing_time_per_char?: number;
  deletions?: number;
  free_text?: string;
}

export interface PauseMsg {
  type: "pause";
  session_id: string;
}

export interface ResumeMsg {
  type: "resume";
  session_id: string;
}

export interface SessionStartMsg {
  type: "session_start";
  graph_id: string;
  config?: Record<string, unknown>;
}

export type ClientMessage = UserFeedbackMsg | PauseMsg | ResumeMsg | SessionStartMsg;

const SERVER_TYPES = new Set(["agent_turn", "pm_snapshot", "session_end", "error"]);

export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const msg = data as { type?: unknown; payload?: unknown };
  if (typeof msg.type !== "string" || !SERVER_TYPES.has(msg.type)) return null;
  if (typeof msg.payload !== "object" || msg.payload === null) return null;
  return data as ServerMessage;
}
