"""Wire messages exchanged with browser clients.

Every message carries a session_id except session_start. The payload field
names are the contract; clients rely on them verbatim.
"""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field


class SessionStartMsg(BaseModel):
    type: Literal["session_start"]
    graph_id: str
    config: dict = Field(default_factory=dict)


class UserFeedbackMsg(BaseModel):
    type: Literal["user_feedback"]
    session_id: str
    kind: Literal["none", "backchannel_positive", "backchannel_negative",
                  "substantive"]
    question_type: Optional[Literal["polar", "open"]] = None
    target_triple: Optional[str] = None
    polarity: Optional[Literal["positive", "negative"]] = None
    typing_time_per_char: Optional[float] = None
    deletions: Optional[int] = None
    free_text: Optional[str] = None


class PauseMsg(BaseModel):
    type: Literal["pause"]
    session_id: str


class ResumeMsg(BaseModel):
    type: Literal["resume"]
    session_id: str


ClientMessage = Union[SessionStartMsg, UserFeedbackMsg, PauseMsg, ResumeMsg]


class AgentTurnPayload(BaseModel):
    texts: list[str]
    action: str
    move: str
    targets: list[str]
    cycle: int


class AgentTurnMsg(BaseModel):
    type: Literal["agent_turn"] = "agent_turn"
    session_id: str
    payload: AgentTurnPayload


class PmSnapshotPayload(BaseModel):
    e: float
    l: float
    a: float
    c: float


class PmSnapshotMsg(BaseModel):
    type: Literal["pm_snapshot"] = "pm_snapshot"
    session_id: str
    payload: PmSnapshotPayload


class SessionEndPayload(BaseModel):
    done: bool
    length: int


class SessionEndMsg(BaseModel):
    type: Literal["session_end"] = "session_end"
    session_id: str
    payload: SessionEndPayload


class ErrorPayload(BaseModel):
    message: str


class ErrorMsg(BaseModel):
    type: Literal["error"] = "error"
    session_id: Optional[str] = None
    payload: ErrorPayload


class GraphSummary(BaseModel):
    id: str
    blocks: list[str]
    triple_count: int


class TripleInfo(BaseModel):
    id: str
    subject: str
    predicate: str
    object: str
    block: str
    complexity: int
    mandatory: bool
    label: str
