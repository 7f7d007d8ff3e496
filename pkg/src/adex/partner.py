"""Probabilistic partner model: exact forward filtering over a joint belief.

Four latent features are tracked, each on {low, medium, high}:

* expertise      - prior domain knowledge
* load           - current cognitive load
* attentiveness  - probability of perceiving an utterance
* cooperativeness - willingness to take the turn and contribute

Evidence per interaction cycle is a vector (pos, neg, sub, tae): presence of
positive / negative feedback, presence of a substantive contribution, and the
typing-and-erasing observable derived from typing telemetry. The posterior is
an exact 3x3x3x3 joint table; transitions factor per feature and the
likelihood factors as P(pos|E,A) * P(neg|A) * P(sub|C,A) * P(tae|L,E).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

log = logging.getLogger(__name__)

FEATURES = ("expertise", "load", "attentiveness", "cooperativeness")
LEVELS = ("low", "medium", "high")
TAE_VALUES = ("lower", "none", "higher")
MAX_TURNS = 1000

_FEATURE_AXIS = {"expertise": 0, "load": 1, "attentiveness": 2,
                 "cooperativeness": 3}
_NORM_TOL = 1e-9


class PartnerModelError(ValueError):
    """Raised for malformed parameter tables or observations."""


def _as_distribution(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape != (3,):
        raise PartnerModelError(f"{name} must have 3 entries, got {arr.shape}")
    if (arr < 0).any() or abs(arr.sum() - 1.0) > _NORM_TOL:
        raise PartnerModelError(f"{name} is not a probability distribution: {values}")
    return arr


def _as_transition(rows, name: str) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.shape != (3, 3):
        raise PartnerModelError(f"{name} must be a 3x3 matrix")
    for i in range(3):
        _as_distribution(arr[i], f"{name} row {LEVELS[i]}")
    return arr


def _default_transitions() -> dict[str, np.ndarray]:
    # Sticky chains: most mass stays put, the remainder moves to the
    # neighboring level(s); expertise drifts slowest.
    def sticky(stay: float) -> np.ndarray:
        rest = 1.0 - stay
        return np.array([
            [stay, rest, 0.0],
            [rest / 2, stay, rest / 2],
            [0.0, rest, stay],
        ])
    return {
        "expertise": sticky(0.95),
        "load": sticky(0.8),
        "attentiveness": sticky(0.8),
        "cooperativeness": sticky(0.8),
    }


def _default_pos_table() -> np.ndarray:
    # P(pos=yes | E, A) = base(E) * att(A): experts confirm more, and any
    # backchannel requires having perceived the utterance at all. The base
    # levels are deliberately low and flat so that sparse positive feedback
    # is explained away by inattentiveness rather than crushing expertise.
    base = np.array([0.09, 0.18, 0.27])
    att = np.array([0.5, 0.75, 1.0])
    return np.outer(base, att)


def _default_sub_table() -> np.ndarray:
    base = np.array([0.1, 0.3, 0.5])
    att = np.array([0.5, 0.75, 1.0])
    return np.outer(base, att)


def _default_tae_table() -> np.ndarray:
    # P(tae | L, E), axes [L, E, value]. High load types slower and erases
    # more; high expertise shifts some mass from 'higher' back to 'lower'.
    # The shift is kept small so no cell reaches zero (a zero cell would let
    # a single observation wipe out a load level for expert users).
    by_load = np.array([
        [0.5, 0.4, 0.1],    # low load
        [0.25, 0.5, 0.25],  # medium load
        [0.1, 0.4, 0.5],    # high load
    ])
    table = np.repeat(by_load[:, None, :], 3, axis=1)
    shift = 0.05
    table[:, 2, 2] -= shift
    table[:, 2, 0] += shift
    return table


@dataclass
class DbnParameters:
    """Transition and observation tables for the partner belief filter."""

    initial: dict[str, np.ndarray] = field(default_factory=lambda: {
        # Slightly optimistic expertise prior; the rest start uniform.
        "expertise": np.array([0.2, 0.45, 0.35]),
        "load": np.full(3, 1 / 3),
        "attentiveness": np.full(3, 1 / 3),
        "cooperativeness": np.full(3, 1 / 3),
    })
    transitions: dict[str, np.ndarray] = field(default_factory=_default_transitions)
    # P(pos=yes | E, A), shape (3, 3): rows E, cols A.
    pos_given_e_a: np.ndarray = field(default_factory=_default_pos_table)
    # P(neg=yes | A), shape (3,).
    neg_given_a: np.ndarray = field(default_factory=lambda: np.array([0.05, 0.15, 0.25]))
    # P(sub=yes | C, A), shape (3, 3): rows C, cols A.
    sub_given_c_a: np.ndarray = field(default_factory=_default_sub_table)
    # P(tae | L, E), shape (3, 3, 3): axes L, E, (lower, none, higher).
    tae_given_l_e: np.ndarray = field(default_factory=_default_tae_table)
    value_map: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.5, 1.0]))

    def validate(self) -> "DbnParameters":
        for f in FEATURES:
            self.initial[f] = _as_distribution(self.initial[f], f"initial[{f}]")
            self.transitions[f] = _as_transition(self.transitions[f],
                                                 f"transitions[{f}]")
        self.pos_given_e_a = np.asarray(self.pos_given_e_a, dtype=float)
        self.neg_given_a = np.asarray(self.neg_given_a, dtype=float)
        self.sub_given_c_a = np.asarray(self.sub_given_c_a, dtype=float)
        self.tae_given_l_e = np.asarray(self.tae_given_l_e, dtype=float)
        for name, arr, shape in (("pos_given_e_a", self.pos_given_e_a, (3, 3)),
                                 ("neg_given_a", self.neg_given_a, (3,)),
                                 ("sub_given_c_a", self.sub_given_c_a, (3, 3))):
            if arr.shape != shape:
                raise PartnerModelError(f"{name} must have shape {shape}")
            if (arr < 0).any() or (arr > 1).any():
                raise PartnerModelError(f"{name} entries must lie in [0,1]")
        if self.tae_given_l_e.shape != (3, 3, 3):
            raise PartnerModelError("tae_given_l_e must have shape (3,3,3)")
        for l in range(3):
            for e in range(3):
                _as_distribution(self.tae_given_l_e[l, e],
                                 f"tae_given_l_e[{LEVELS[l]},{LEVELS[e]}]")
        self.value_map = np.asarray(self.value_map, dtype=float)
        if self.value_map.shape != (3,):
            raise PartnerModelError("value_map must have 3 entries")
        return self


@dataclass(frozen=True)
class FeedbackObservation:
    """One cycle's evidence vector."""

    pos: bool = False
    neg: bool = False
    sub: bool = False
    tae: str = "none"

    def __post_init__(self):
        if self.pos and self.neg:
            raise PartnerModelError("pos and neg cannot both be present")
        if self.tae not in TAE_VALUES:
            raise PartnerModelError(f"unknown tae value {self.tae!r}")


@dataclass
class TypingBaseline:
    """Running means of the user's typing speed and erasing behavior."""

    mean_time_per_char: float = 0.5
    mean_deletions: float = 2.0
    samples: int = 1

    def update(self, time_per_char: float, deletions: float) -> None:
        n = self.samples
        self.mean_time_per_char = (self.mean_time_per_char * n + time_per_char) / (n + 1)
        self.mean_deletions = (self.mean_deletions * n + deletions) / (n + 1)
        self.samples = n + 1


@dataclass(frozen=True)
class PartnerState:
    """Immutable joint posterior over the four features plus the turn count."""

    posterior: np.ndarray
    turn_index: int = 0

    def __post_init__(self):
        if self.posterior.shape != (3, 3, 3, 3):
            raise PartnerModelError("posterior must have shape (3,3,3,3)")
        if abs(self.posterior.sum() - 1.0) > _NORM_TOL or (self.posterior < 0).any():
            raise PartnerModelError("posterior is not normalized")


def init_partner_state(params: DbnParameters) -> PartnerState:
    """Initial belief: the product of the per-feature priors."""
    params.validate()
    joint = (params.initial["expertise"][:, None, None, None]
             * params.initial["load"][None, :, None, None]
             * params.initial["attentiveness"][None, None, :, None]
             * params.initial["cooperativeness"][None, None, None, :])
    return PartnerState(posterior=joint, turn_index=0)


def compute_tae(time_per_char: float, deletions: float,
                baseline: TypingBaseline) -> str:
    """Compares one typed contribution against the user's running means.

    'higher' only when both typing time and deletions exceed the means,
    'lower' only when both fall short; anything mixed is 'none'. The
    baseline is updated with the new sample afterwards.
    """
    if baseline.samples < 1:
        raise PartnerModelError("typing baseline has no samples yet")
    if time_per_char < 0 or deletions < 0:
        raise PartnerModelError("typing statistics must be non-negative")
    if time_per_char > baseline.mean_time_per_char and deletions > baseline.mean_deletions:
        result = "higher"
    elif time_per_char < baseline.mean_time_per_char and deletions < baseline.mean_deletions:
        result = "lower"
    else:
        result = "none"
    baseline.update(time_per_char, deletions)
    return result


def likelihood_table(obs: FeedbackObservation, params: DbnParameters) -> np.ndarray:
    """P(observation | E, L, A, C) as a full (3,3,3,3) table."""
    pos = params.pos_given_e_a if obs.pos else 1.0 - params.pos_given_e_a
    neg = params.neg_given_a if obs.neg else 1.0 - params.neg_given_a
    sub = params.sub_given_c_a if obs.sub else 1.0 - params.sub_given_c_a
    tae = params.tae_given_l_e[:, :, TAE_VALUES.index(obs.tae)]
    # Joint axes are (E, L, A, C).
    like = (pos[:, None, :, None]            # indexed by (E, A)
            * neg[None, None, :, None]       # indexed by (A,)
            * sub.T[None, None, :, :]        # (C, A) table -> axes (A, C)
            * tae.T[:, :, None, None])       # (L, E) table -> axes (E, L)
    return like


def _predict(posterior: np.ndarray, params: DbnParameters) -> np.ndarray:
    out = posterior
    for f, axis in _FEATURE_AXIS.items():
        out = np.moveaxis(np.tensordot(out, params.transitions[f], axes=([axis], [0])),
                          -1, axis)
    return out


def observe(state: PartnerState, obs: FeedbackObservation,
            params: DbnParameters) -> PartnerState:
    """One exact filter step: predict, then condition on the evidence.

    The first observation conditions the initial prior directly; the
    transition model only connects consecutive steps.
    """
    if state.turn_index >= MAX_TURNS:
        raise PartnerModelError(
            f"filtering horizon of {MAX_TURNS} steps exhausted")
    predicted = state.posterior if state.turn_index == 0 \
        else _predict(state.posterior, params)
    weighted = predicted * likelihood_table(obs, params)
    total = weighted.sum()
    if total <= 0.0:
        log.warning("observation %s has zero likelihood; keeping predicted prior", obs)
        posterior = predicted / predicted.sum()
    else:
        posterior = weighted / total
    return PartnerState(posterior=posterior, turn_index=state.turn_index + 1)


def feature_marginal(state: PartnerState, feature: str) -> np.ndarray:
    if feature not in _FEATURE_AXIS:
        raise PartnerModelError(f"unknown feature {feature!r}")
    axes = tuple(a for f, a in _FEATURE_AXIS.items() if f != feature)
    return state.posterior.sum(axis=axes)


def expectation(state: PartnerState, feature: str,
                params: Optional[DbnParameters] = None) -> float:
    """Marginal of the feature dotted with the level value map."""
    values = params.value_map if params is not None else np.array([0.0, 0.5, 1.0])
    return float(feature_marginal(state, feature) @ values)


def expectations(state: PartnerState,
                 params: Optional[DbnParameters] = None) -> dict[str, float]:
    return {f: expectation(state, f, params) for f in FEATURES}
