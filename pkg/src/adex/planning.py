"""Per-turn decision process: formulas, move legality, and state assembly.

Each turn a fresh decision problem is built from the current partner
expectations and knowledge state, so rewards and transition probabilities
track the evolving beliefs. Three actions exist; each is realized by moves
with different understanding gains and success probabilities:

* provide - introduce new triples (declarative | comparison)
* deepen  - strengthen an introduced triple (repeat | additional | example | comparison)
* answer  - respond to the active question (polar | summarize | declarative)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .graph import KnowledgeGraph

PROVIDE = "provide"
DEEPEN = "deepen"
ANSWER = "answer"

# Enumeration order doubles as the deterministic tie-break order.
PROVIDE_MOVES = ("comparison", "declarative")
DEEPEN_MOVES = ("repeat", "additional", "example", "comparison")
ANSWER_MOVES_BY_QUESTION = {"polar": ("polar", "summarize"), "open": ("declarative",)}

MOVES_BY_ACTION = {
    PROVIDE: set(PROVIDE_MOVES),
    DEEPEN: set(DEEPEN_MOVES),
    ANSWER: {"polar", "summarize", "declarative"},
}

# Deepen fallback breadth when nothing under discussion is still open.
_MAX_DEEPEN_TARGETS = 4


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


class PlanningError(ValueError):
    pass


@dataclass(frozen=True)
class Question:
    kind: str  # "polar" | "open"
    target: str

    def __post_init__(self):
        if self.kind not in ("polar", "open"):
            raise PlanningError(f"unknown question kind {self.kind!r}")


@dataclass
class EngineConfig:
    """Tunable engine parameters; every field can be overridden via config."""

    alpha: float = 0.5
    kappa: int = 5
    beta: float = -100.0
    gth: float = 0.76
    fb_gain: float = 0.3
    fb_loss: float = 0.5
    mcts_iterations: int = 2000
    mcts_exploration: float = math.sqrt(2)
    mcts_seed: int = 0
    horizon: int = 6
    sampled_effects: bool = False
    # How silence gates turn uptake: a cycle without feedback only takes
    # effect with a probability derived from attentiveness/cooperativeness.
    silence_uptake: str = "mean"  # "mean" | "product" | "off"
    max_cycles: int = 1000

    def validate(self) -> "EngineConfig":
        if not 0.0 < self.alpha <= 1.0:
            raise PlanningError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.kappa < 1:
            raise PlanningError(f"kappa must be >= 1, got {self.kappa}")
        if self.beta >= -10.0:
            raise PlanningError(f"beta must be below -10, got {self.beta}")
        if not 0.0 < self.gth < 1.0:
            raise PlanningError(f"gth must lie in (0, 1), got {self.gth}")
        if self.mcts_iterations < 1 or self.horizon < 1:
            raise PlanningError("mcts_iterations and horizon must be >= 1")
        if self.silence_uptake not in ("product", "mean", "off"):
            raise PlanningError(
                f"unknown silence_uptake mode {self.silence_uptake!r}")
        return self


@dataclass(frozen=True)
class PmExpectations:
    e: float
    l: float
    a: float
    c: float


@dataclass(frozen=True)
class MdpState:
    """Planning state for one block of the explanation."""

    block: str
    grounded: int
    total: int
    question: Optional[Question]
    pm: PmExpectations
    cud: tuple[str, ...]
    lous: dict[str, float]
    last_triple: Optional[str] = None

    def __post_init__(self):
        if self.grounded > self.total:
            raise PlanningError("grounded count exceeds total count")
        for tid, lou in self.lous.items():
            if not 0.0 <= lou <= 1.0:
                raise PlanningError(f"lou for {tid!r} outside [0,1]: {lou}")

    @property
    def complete(self) -> bool:
        return self.grounded >= self.total


@dataclass(frozen=True)
class MovePlan:
    action: str
    move: str
    targets: tuple[str, ...]
    predicted_lou: dict[str, float]
    transition_prob: float
    reward: float

    def __post_init__(self):
        if self.move not in MOVES_BY_ACTION[self.action]:
            raise PlanningError(
                f"move {self.move!r} is not legal for action {self.action!r}")
        if not 0.0 <= self.transition_prob <= 1.0:
            raise PlanningError("transition_prob outside [0,1]")


# -- formulas ----------------------------------------------------------------

def capacity(load_expectation: float, kappa: int) -> int:
    """How much combined complexity the next utterance may carry.

    Rounded half-up and floored at one so the agent can always speak.
    """
    if not 0.0 <= load_expectation <= 1.0:
        raise PlanningError("load expectation outside [0,1]")
    return max(1, int((1.0 - load_expectation) * kappa + 0.5))


def lou_provide(move: str, e_expect: float, cx: int, alpha: float = 0.5) -> float:
    """Initial understanding after introducing a triple.

    Declaratives gain linearly with expertise, comparisons quadratically,
    so the preferred rendition flips once expertise exceeds alpha.
    """
    if move == "declarative":
        return _clamp01((1.0 + e_expect * alpha / cx) * 0.5)
    if move == "comparison":
        return _clamp01((1.0 + e_expect ** 2 / cx) * 0.5)
    raise PlanningError(f"unknown provide move {move!r}")


def lou_deepen(move: str, current_lou: float, e_expect: float, cx: int,
               gth: float = 0.8, alpha: float = 0.5) -> float:
    """Understanding after elaborating an already introduced triple."""
    if not 0.0 < current_lou < gth:
        raise PlanningError(
            f"deepen requires 0 < lou < {gth}, got {current_lou}")
    base = current_lou + (1.0 - current_lou) / 2.0
    if move in ("repeat", "example"):
        return _clamp01(base + e_expect * alpha / cx)
    if move in ("additional", "comparison"):
        return _clamp01(base + e_expect ** 2 / cx)
    raise PlanningError(f"unknown deepen move {move!r}")


def lou_answer(move: str, current_lou: float, l_expect: float,
               question: Optional[str], alpha: float = 0.5) -> float:
    """Understanding after answering; gains depend on the cognitive load."""
    if not 0.0 <= current_lou <= 1.0:
        raise PlanningError("lou outside [0,1]")
    if move == "polar" and question == "polar":
        return _clamp01(current_lou + (1.0 - current_lou) * (1.0 - l_expect))
    if move == "summarize" and question == "polar":
        return _clamp01(current_lou + (1.0 - current_lou) * l_expect)
    if move == "declarative" and question == "open":
        return _clamp01(current_lou + (1.0 - current_lou) * alpha)
    return current_lou


def transition_prob(action: str, move: str, a_expect: float,
                    answer_on_target: bool = True) -> float:
    """Chance that the explainee actually takes up the utterance."""
    if action == PROVIDE:
        return 1.0
    if action == DEEPEN:
        if move in ("repeat", "additional"):
            return (1.0 + a_expect) / 2.0
        if move in ("example", "comparison"):
            return a_expect
        raise PlanningError(f"unknown deepen move {move!r}")
    if action == ANSWER:
        return 1.0 if answer_on_target else 0.0
    raise PlanningError(f"unknown action {action!r}")


# -- block view ---------------------------------------------------------------

class BlockView:
    """Precomputed per-block structure shared by all search states of a turn."""

    def __init__(self, graph: KnowledgeGraph, block: str):
        self.block = block
        self.mandatory = tuple(graph.mandatory_ids(block))
        triples = graph.triples
        self.cx = {tid: triples[tid].complexity for tid in graph.block_triples[block]}
        self.internal_pres = {
            tid: tuple(p.ref for p in triples[tid].preconditions if not p.external)
            for tid in graph.block_triples[block]
        }
        self.adjacent_pairs = tuple(
            (a, b) for i, a in enumerate(self.mandatory)
            for b in self.mandatory[i + 1:] if b in graph.adjacency[a]
        )
        self.with_comparison = {tid for tid in triples
                                if triples[tid].comparison_domain is not None}
        self.with_example = {tid for tid in triples if triples[tid].has_example}
        self.complexity_of = lambda tid: triples[tid].complexity
        self.distances = graph._distances
        self.graph = graph

    def distance(self, a: str, b: str) -> float:
        return self.distances[a].get(b, math.inf)


def candidate_sets_from(open_ids: list[str], adjacent_pairs, cx: dict[str, int],
                        v: int) -> list[tuple[str, ...]]:
    """Shared ranking core for provide candidates.

    Singletons and adjacent pairs of un-introduced mandatory triples, keeping
    only the tier whose combined complexity is closest to the capacity v.
    """
    if not open_ids:
        return []
    open_set = set(open_ids)
    candidates: list[tuple[str, ...]] = [(tid,) for tid in sorted(open_ids)]
    candidates.extend((a, b) for a, b in adjacent_pairs
                      if a in open_set and b in open_set)
    best = None
    tier: list[tuple[str, ...]] = []
    for ids in candidates:
        gap = abs(sum(cx[t] for t in ids) - v)
        if best is None or gap < best:
            best, tier = gap, [ids]
        elif gap == best:
            tier.append(ids)
    tier.sort(key=lambda ids: (len(ids), ids))
    return tier


# -- state assembly, rewards, enumeration -------------------------------------

def build_mdp_state(graph: KnowledgeGraph, block: str, pm: PmExpectations,
                    cud: tuple[str, ...], question: Optional[Question],
                    last_triple: Optional[str], cfg: EngineConfig) -> MdpState:
    """Snapshot of the knowledge state relevant for planning one turn."""
    status = graph.block_status(block, cfg.gth)
    lous: dict[str, float] = {}
    for tid in graph.block_triples[block]:
        lou = graph.triples[tid].lou
        if lou is not None:
            lous[tid] = lou
    extras = set(cud)
    if question is not None:
        extras.add(question.target)
    if last_triple is not None:
        extras.add(last_triple)
    for tid in extras:
        lou = graph.require(tid).lou
        if lou is not None:
            lous.setdefault(tid, lou)
    return MdpState(block=block, grounded=status.grounded_count,
                    total=status.total_count, question=question, pm=pm,
                    cud=cud, lous=lous, last_triple=last_triple)


def reward_provide(state: MdpState, targets: tuple[str, ...], view: BlockView,
                   cfg: EngineConfig) -> float:
    """Average understanding of the targets' in-block preconditions, minus one.

    Un-introduced preconditions count as zero understanding; with no
    preconditions the provide is unobstructed and scores zero. When the block
    holds nothing left to introduce the action is invalid and scores beta.
    """
    if all(tid in state.lous for tid in view.mandatory):
        return cfg.beta
    pres: list[str] = []
    for tid in targets:
        pres.extend(view.internal_pres[tid])
    if not pres:
        return 0.0
    total = sum(state.lous.get(p, 0.0) for p in pres)
    return total / len(pres) - 1.0


def reward_deepen(state: MdpState, target: str, view: BlockView,
                  cfg: EngineConfig) -> float:
    """Negative graph distance to the previous utterance, minus one."""
    eligible = any(0.0 < state.lous.get(tid, 0.0) < cfg.gth for tid in state.cud) \
        or any(0.0 < state.lous.get(tid, 0.0) < cfg.gth for tid in view.mandatory)
    if not eligible:
        return cfg.beta
    if state.last_triple is None:
        return -1.0
    d = view.distance(target, state.last_triple)
    if math.isinf(d):
        return cfg.beta
    return -d - 1.0


def reward_answer(state: MdpState, cfg: EngineConfig) -> float:
    """Zero when a question is pending; answering out of the blue scores beta."""
    return 0.0 if state.question is not None else cfg.beta


def _deepen_candidates(state: MdpState, view: BlockView, cfg: EngineConfig) -> list[str]:
    cands = [tid for tid in state.cud
             if 0.0 < state.lous.get(tid, 0.0) < cfg.gth]
    if not cands:
        # Nothing under discussion is still open: fall back to the block's
        # weakest introduced triples so the explanation cannot stall.
        cands = [tid for tid in view.mandatory
                 if 0.0 < state.lous.get(tid, 0.0) < cfg.gth]
    cands.sort(key=lambda tid: (state.lous[tid], tid))
    return cands[:_MAX_DEEPEN_TARGETS]


def enumerate_valid_moves(state: MdpState, view: BlockView,
                          cfg: EngineConfig) -> list[MovePlan]:
    """All conversationally valid (action, move) combinations for this state.

    A pending question preempts everything else; otherwise provide targets
    come from the capacity-ranked candidate sets and deepen targets from the
    open triples under discussion.
    """
    plans: list[MovePlan] = []
    if state.question is not None:
        q = state.question
        current = state.lous.get(q.target, 0.0)
        on_target = state.cud == (q.target,)
        for move in ANSWER_MOVES_BY_QUESTION[q.kind]:
            predicted = lou_answer(move, current, state.pm.l, q.kind, cfg.alpha)
            plans.append(MovePlan(
                action=ANSWER, move=move, targets=(q.target,),
                predicted_lou={q.target: predicted},
                transition_prob=transition_prob(ANSWER, move, state.pm.a, on_target),
                reward=reward_answer(state, cfg)))
        return plans

    v = capacity(state.pm.l, cfg.kappa)
    open_ids = [tid for tid in view.mandatory if tid not in state.lous]
    for targets in candidate_sets_from(open_ids, view.adjacent_pairs, view.cx, v):
        r = reward_provide(state, targets, view, cfg)
        moves = PROVIDE_MOVES if all(t in view.with_comparison for t in targets) \
            else ("declarative",)
        for move in moves:
            predicted = {t: lou_provide(move, state.pm.e, view.cx[t], cfg.alpha)
                         for t in targets}
            plans.append(MovePlan(action=PROVIDE, move=move, targets=targets,
                                  predicted_lou=predicted, transition_prob=1.0,
                                  reward=r))

    for tid in _deepen_candidates(state, view, cfg):
        r = reward_deepen(state, tid, view, cfg)
        cx = view.complexity_of(tid)
        current = state.lous[tid]
        for move in DEEPEN_MOVES:
            if move == "example" and tid not in view.with_example:
                continue
            if move == "comparison" and tid not in view.with_comparison:
                continue
            predicted = lou_deepen(move, current, state.pm.e, cx, cfg.gth, cfg.alpha)
            plans.append(MovePlan(
                action=DEEPEN, move=move, targets=(tid,),
                predicted_lou={tid: predicted},
                transition_prob=transition_prob(DEEPEN, move, state.pm.a),
                reward=r))
    return plans


def apply_plan(state: MdpState, plan: MovePlan, view: BlockView,
               cfg: EngineConfig, success: bool) -> MdpState:
    """Successor state under the plan; a failed transition changes nothing."""
    if not success:
        return state
    lous = dict(state.lous)
    lous.update(plan.predicted_lou)
    grounded = sum(1 for tid in view.mandatory if lous.get(tid, -1.0) >= cfg.gth)
    question = None if plan.action == ANSWER else state.question
    return MdpState(block=state.block, grounded=grounded, total=state.total,
                    question=question, pm=state.pm, cud=plan.targets,
                    lous=lous, last_triple=plan.targets[-1])


def plan_distance(a: MovePlan, b: MovePlan, view: BlockView) -> float:
    return min(view.distance(x, y) for x in a.targets for y in b.targets)


def combine_best(top: list[MovePlan], view: BlockView) -> list[MovePlan]:
    """Merge the two best plans into one turn when they belong together.

    Two plans are uttered together iff they share the action type, address
    different triples, and their targets are semantically adjacent; answers
    are never merged, and two renditions of the same content are not
    presented twice.
    """
    if not top:
        raise PlanningError("no plans to combine")
    if len(top) == 1:
        return [top[0]]
    a, b = top[0], top[1]
    if a.action == b.action and a.action in (PROVIDE, DEEPEN) \
            and not set(a.targets) & set(b.targets) \
            and plan_distance(a, b, view) <= 1.0:
        return [a, b]
    return [a]
