"""Session orchestration: the interaction cycle gluing everything together.

One cycle: resolve the previous turn's effects in light of the new feedback,
update per-triple understanding from that feedback, filter the partner
belief, rebuild and solve the decision process, and realize the utterance.

Effect resolution is deferred by one cycle because uptake of an utterance
only becomes assessable once the explainee reacted (or stayed silent).
Any feedback proves the turn was taken up; silence leaves uptake to chance,
with a probability derived from the estimated attentiveness and
cooperativeness. A missed turn changes no understanding, so its triples
remain open and can be re-addressed.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import Optional

from .graph import COMPARISON_DOMAIN_LABELS, KnowledgeGraph
from .mcts import MctsSolver
from .partner import (DbnParameters, FeedbackObservation, PartnerState,
                      TypingBaseline, compute_tae, expectations,
                      init_partner_state, observe)
from .planning import (ANSWER, EngineConfig, MovePlan, PmExpectations,
                       Question, build_mdp_state, combine_best)

log = logging.getLogger(__name__)

FEEDBACK_KINDS = ("none", "backchannel_positive", "backchannel_negative",
                  "substantive")


class SessionError(RuntimeError):
    pass


class SessionDone(SessionError):
    pass


@dataclass
class RawFeedback:
    """One cycle's explainee input, already structured."""

    kind: str = "none"
    question_type: Optional[str] = None
    target_triple: Optional[str] = None
    polarity: Optional[str] = None
    typing_time_per_char: Optional[float] = None
    deletions: Optional[int] = None
    free_text: Optional[str] = None

    def __post_init__(self):
        if self.kind not in FEEDBACK_KINDS:
            raise ValueError(f"unknown feedback kind {self.kind!r}")
        if self.kind == "substantive":
            missing = [name for name, value in
                       (("question_type", self.question_type),
                        ("target_triple", self.target_triple),
                        ("polarity", self.polarity)) if value is None]
            if missing:
                raise ValueError(
                    f"substantive feedback requires {', '.join(missing)}")
            if self.question_type not in ("polar", "open"):
                raise ValueError(f"unknown question type {self.question_type!r}")
        if self.polarity is not None and self.polarity not in ("positive", "negative"):
            raise ValueError(f"unknown polarity {self.polarity!r}")


@dataclass
class PlanRecord:
    """Transcript entry for one executed plan."""

    cycle: int
    feedback: str
    observation: dict
    pm: dict[str, float]
    action: str
    move: str
    targets: tuple[str, ...]
    reward: float
    transition_prob: float
    lou_after: dict[str, Optional[float]]
    taken: bool = True

    def as_dict(self) -> dict:
        return {
            "cycle": self.cycle, "feedback": self.feedback,
            "observation": self.observation, "pm": self.pm,
            "action": self.action, "move": self.move,
            "targets": list(self.targets), "reward": self.reward,
            "transition_prob": self.transition_prob,
            "lou_after": self.lou_after, "taken": self.taken,
        }


@dataclass
class PendingTurn:
    """An uttered turn whose understanding effects await the next feedback."""

    cycle: int
    feedback_kind: str
    observation: dict
    pm: dict[str, float]
    plans: list[MovePlan]


@dataclass
class AgentTurn:
    utterances: list[str]
    plans: list[MovePlan]
    pm: dict[str, float]
    done: bool
    cycle: int


@dataclass
class Session:
    """All state of one explainer-explainee interaction."""

    graph: KnowledgeGraph
    cfg: EngineConfig
    params: DbnParameters
    partner: PartnerState
    baseline: TypingBaseline = field(default_factory=TypingBaseline)
    cud: tuple[str, ...] = ()
    question: Optional[Question] = None
    last_triple: Optional[str] = None
    pending: Optional[PendingTurn] = None
    seed: int = 0
    cycle_count: int = 0
    agent_turns: int = 0
    done: bool = False
    converged: bool = True
    transcript: list[PlanRecord] = field(default_factory=list)
    trajectory: list[dict[str, float]] = field(default_factory=list)
    rng: random.Random = field(default_factory=random.Random)


def new_session(graph: KnowledgeGraph, cfg: Optional[EngineConfig] = None,
                params: Optional[DbnParameters] = None, seed: int = 0) -> Session:
    cfg = (cfg or EngineConfig()).validate()
    params = (params or DbnParameters()).validate()
    return Session(graph=graph.fresh_copy(), cfg=cfg, params=params,
                   partner=init_partner_state(params), seed=seed,
                   rng=random.Random(seed))


def _uptake_probability(pm: dict[str, float], cfg: EngineConfig) -> float:
    a, c = pm["attentiveness"], pm["cooperativeness"]
    if cfg.silence_uptake == "product":
        return a * c
    if cfg.silence_uptake == "mean":
        return (a + c) / 2.0
    return 1.0


def _resolve_pending(session: Session, feedback: Optional[RawFeedback]) -> None:
    """Applies (or discards) the previous turn's predicted understanding.

    Feedback of any kind proves the turn was taken up. Silence is gated by
    the uptake probability estimated at utterance time; a missed turn leaves
    all understanding untouched.
    """
    pending = session.pending
    if pending is None:
        return
    session.pending = None
    cfg = session.cfg
    taken = True
    if feedback is not None and feedback.kind == "none":
        p = _uptake_probability(pending.pm, cfg)
        taken = session.rng.random() < p
    graph = session.graph
    for plan in pending.plans:
        if taken:
            _apply_plan_effects(session, plan)
        session.transcript.append(PlanRecord(
            cycle=pending.cycle, feedback=pending.feedback_kind,
            observation=pending.observation, pm=pending.pm,
            action=plan.action, move=plan.move, targets=plan.targets,
            reward=plan.reward, transition_prob=plan.transition_prob,
            lou_after={tid: graph.triples[tid].lou for tid in plan.targets},
            taken=taken))


def _interpret_feedback(session: Session, fb: RawFeedback) -> FeedbackObservation:
    """Maps raw feedback to the evidence vector and applies its lou effect."""
    cfg = session.cfg
    if fb.kind == "none":
        return FeedbackObservation()
    if fb.kind in ("backchannel_positive", "backchannel_negative"):
        polarity = "positive" if fb.kind == "backchannel_positive" else "negative"
        introduced = [tid for tid in session.cud
                      if session.graph.triples[tid].lou is not None]
        if introduced:
            session.graph.apply_feedback_to_lou(introduced, polarity,
                                                cfg.fb_gain, cfg.fb_loss)
        return FeedbackObservation(pos=polarity == "positive",
                                   neg=polarity == "negative")
    # Substantive: the question's target becomes the discussion focus.
    target = session.graph.require(fb.target_triple).id
    if session.graph.triples[target].lou is None:
        session.graph.set_lou(target, 0.0)
    session.graph.apply_feedback_to_lou([target], fb.polarity,
                                        cfg.fb_gain, cfg.fb_loss)
    session.question = Question(kind=fb.question_type, target=target)
    session.cud = (target,)
    if fb.typing_time_per_char is not None and fb.deletions is not None:
        tae = compute_tae(fb.typing_time_per_char, fb.deletions, session.baseline)
    else:
        tae = "none"
    return FeedbackObservation(pos=fb.polarity == "positive",
                               neg=fb.polarity == "negative",
                               sub=True, tae=tae)


def current_block(session: Session) -> Optional[str]:
    """First block whose mandatory triples are not all grounded."""
    for block in session.graph.blocks:
        if not session.graph.block_status(block, session.cfg.gth).complete:
            return block
    return None


def realize(plan: MovePlan, graph: KnowledgeGraph) -> str:
    """Fills the targets' templates for the plan's move kind."""
    parts = []
    for tid in plan.targets:
        triple = graph.require(tid)
        template = triple.template_texts.get(plan.move)
        if template is None:
            log.warning("triple %s has no %r template; falling back to declarative",
                        tid, plan.move)
            template = triple.template_texts.get(
                "declarative", f"{triple.subject} {triple.predicate} {triple.object}.")
        if "{domain}" in template:
            label = COMPARISON_DOMAIN_LABELS.get(triple.comparison_domain or "", "")
            template = template.replace("{domain}", label)
        parts.append(template)
    return " ".join(parts)


def _apply_plan_effects(session: Session, plan: MovePlan) -> None:
    graph, cfg = session.graph, session.cfg
    t = plan.transition_prob
    if cfg.sampled_effects:
        if session.rng.random() < t:
            for tid, predicted in plan.predicted_lou.items():
                graph.set_lou(tid, predicted)
        return
    for tid, predicted in plan.predicted_lou.items():
        old = graph.triples[tid].lou
        if old is None:
            old = 0.0
        # Expected update: success probability blends the predicted
        # understanding with the unchanged one.
        graph.set_lou(tid, t * predicted + (1.0 - t) * old)


def _matching_moves(question_kind: str) -> tuple[str, ...]:
    return ("polar", "summarize") if question_kind == "polar" else ("declarative",)


def step(session: Session, feedback: RawFeedback) -> AgentTurn:
    """Runs one interaction cycle and returns the agent's turn."""
    if session.done:
        raise SessionDone("step on a finished session")
    cfg = session.cfg
    _resolve_pending(session, feedback)
    obs = _interpret_feedback(session, feedback)
    session.partner = observe(session.partner, obs, session.params)
    session.cycle_count += 1
    pm = expectations(session.partner, session.params)
    session.trajectory.append(pm)

    block = current_block(session)
    if block is None and session.question is None:
        session.done = True
        return AgentTurn(utterances=[], plans=[], pm=pm, done=True,
                         cycle=session.cycle_count)

    plan_block = block if block is not None else session.graph.triples[
        session.question.target].block
    pm_exp = PmExpectations(e=pm["expertise"], l=pm["load"],
                            a=pm["attentiveness"], c=pm["cooperativeness"])
    state = build_mdp_state(session.graph, plan_block, pm_exp, session.cud,
                            session.question, session.last_triple, cfg)
    solver = MctsSolver(session.graph, cfg, plan_block)
    top = solver.solve(state, seed=session.seed * 100003 + session.cycle_count)
    executed = combine_best(top, solver.view)

    obs_dict = {"pos": obs.pos, "neg": obs.neg, "sub": obs.sub, "tae": obs.tae}
    texts = [realize(plan, session.graph) for plan in executed]
    all_targets: list[str] = []
    for plan in executed:
        all_targets.extend(plan.targets)
        if plan.action == ANSWER and session.question is not None \
                and plan.move in _matching_moves(session.question.kind):
            session.question = None
    session.cud = tuple(dict.fromkeys(all_targets))
    session.last_triple = all_targets[-1]
    session.pending = PendingTurn(cycle=session.cycle_count,
                                  feedback_kind=feedback.kind,
                                  observation=obs_dict, pm=pm, plans=executed)
    session.agent_turns += 1

    if session.cycle_count >= cfg.max_cycles:
        # Cap reached: resolve the final turn unconditionally and stop.
        _resolve_pending(session, None)
        session.done = True
        session.converged = False
        log.warning("session hit the %d-cycle cap without full grounding",
                    cfg.max_cycles)
    return AgentTurn(utterances=texts, plans=executed, pm=pm,
                     done=session.done, cycle=session.cycle_count)


def interaction_length(session: Session) -> int:
    """Number of agent turns in a finished session."""
    if not session.done:
        raise SessionError("session still running")
    return session.agent_turns
