"""adex: adaptive explanation engine with a probabilistic partner model."""

from .engine import AgentTurn, RawFeedback, Session, interaction_length, new_session, step
from .graph import KnowledgeGraph, Triple, load_graph
from .partner import (DbnParameters, FeedbackObservation, PartnerState,
                      TypingBaseline, compute_tae, expectation,
                      init_partner_state, observe)
from .planning import EngineConfig, MdpState, MovePlan, Question

__all__ = [
    "AgentTurn", "RawFeedback", "Session", "interaction_length",
    "new_session", "step", "KnowledgeGraph", "Triple", "load_graph",
    "DbnParameters", "FeedbackObservation", "PartnerState", "TypingBaseline",
    "compute_tae", "expectation", "init_partner_state", "observe",
    "EngineConfig", "MdpState", "MovePlan", "Question",
]

__version__ = "0.1.0"
