"""Simulated explainees: distribution-driven feedback generators.

A persona is a probability profile over feedback kinds (none, backchannel,
substantive) and feedback tendency (positive, negative). Mood-switching
personas carry a schedule of such profiles that rotates every fixed number
of cycles.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Optional

from .engine import RawFeedback, Session

_SUM_TOL = 1e-9


class PersonaError(ValueError):
    pass


@dataclass
class PersonaCore:
    """One feedback-probability profile."""

    name: str
    p_no: float
    p_bc: float
    p_s: float
    p_pos: float
    p_neg: float

    def validate(self) -> "PersonaCore":
        for label, value in (("p_no", self.p_no), ("p_bc", self.p_bc),
                             ("p_s", self.p_s), ("p_pos", self.p_pos),
                             ("p_neg", self.p_neg)):
            if not 0.0 <= value <= 1.0:
                raise PersonaError(f"{self.name}: {label}={value} outside [0,1]")
        if abs(self.p_no + self.p_bc + self.p_s - 1.0) > _SUM_TOL:
            raise PersonaError(
                f"{self.name}: feedback-kind probabilities sum to "
                f"{self.p_no + self.p_bc + self.p_s}, expected 1")
        if abs(self.p_pos + self.p_neg - 1.0) > _SUM_TOL:
            raise PersonaError(
                f"{self.name}: tendency probabilities sum to "
                f"{self.p_pos + self.p_neg}, expected 1")
        return self


@dataclass
class PersonaConfig:
    """A persona; either one fixed profile or a rotating mood schedule."""

    name: str
    core: Optional[PersonaCore] = None
    mode_schedule: list[PersonaCore] = field(default_factory=list)
    mode_length: int = 30
    p_polar_question: float = 0.7
    rng_seed: Optional[int] = None

    def validate(self) -> "PersonaConfig":
        if (self.core is None) == (not self.mode_schedule):
            raise PersonaError(
                f"{self.name}: exactly one of a base profile or a mood "
                f"schedule is required")
        if self.core is not None:
            self.core.validate()
        for mode in self.mode_schedule:
            mode.validate()
        if self.mode_length < 1:
            raise PersonaError(f"{self.name}: mode_length must be >= 1")
        if not 0.0 <= self.p_polar_question <= 1.0:
            raise PersonaError(f"{self.name}: p_polar_question outside [0,1]")
        return self

    def active_core(self, cycle_index: int) -> PersonaCore:
        """Profile in effect for a 0-based cycle index."""
        if self.core is not None:
            return self.core
        slot = (cycle_index // self.mode_length) % len(self.mode_schedule)
        return self.mode_schedule[slot]


def _typing_stats(session: Session, outcome: str) -> tuple[float, int]:
    """Crafts (time per char, deletions) that yield the requested tae value."""
    mean_t = session.baseline.mean_time_per_char
    mean_d = session.baseline.mean_deletions
    if outcome == "higher":
        return mean_t * 1.25, math.floor(mean_d) + 1
    if outcome == "lower":
        return mean_t * 0.75, max(0, math.ceil(mean_d) - 1)
    return mean_t, max(0, round(mean_d))


def sample_feedback(persona: PersonaConfig, cycle_index: int, session: Session,
                    rng: random.Random) -> RawFeedback:
    """Draws one cycle's feedback from the persona's active profile.

    Substantive questions target a triple currently under discussion
    (falling back to the last introduced one); typing statistics are drawn
    so the three typing-and-erasing outcomes are equally likely.
    """
    core = persona.active_core(cycle_index)
    introduced = [tid for tid in session.cud
                  if session.graph.triples[tid].lou is not None]
    if not introduced and session.last_triple is not None:
        introduced = [session.last_triple]
    r = rng.random()
    if r < core.p_no or not introduced:
        return RawFeedback(kind="none")
    polarity = "positive" if rng.random() < core.p_pos else "negative"
    if r < core.p_no + core.p_bc:
        kind = "backchannel_positive" if polarity == "positive" \
            else "backchannel_negative"
        return RawFeedback(kind=kind)
    target = introduced[rng.randrange(len(introduced))]
    question_type = "polar" if rng.random() < persona.p_polar_question else "open"
    outcome = ("lower", "none", "higher")[rng.randrange(3)]
    time_per_char, deletions = _typing_stats(session, outcome)
    return RawFeedback(kind="substantive", question_type=question_type,
                       target_triple=target, polarity=polarity,
                       typing_time_per_char=time_per_char, deletions=deletions)


# The four consistent evaluation personas plus the mood-switching one.
def default_personas() -> list[PersonaConfig]:
    profiles = [
        PersonaCore("Hermione", p_no=0.1, p_bc=0.5, p_s=0.4, p_pos=0.9, p_neg=0.1),
        PersonaCore("Harry", p_no=0.4, p_bc=0.4, p_s=0.2, p_pos=0.3, p_neg=0.7),
        PersonaCore("Ron", p_no=0.6, p_bc=0.3, p_s=0.1, p_pos=0.8, p_neg=0.2),
        PersonaCore("Neville", p_no=0.2, p_bc=0.4, p_s=0.4, p_pos=0.3, p_neg=0.7),
    ]
    personas = [PersonaConfig(name=p.name, core=p).validate() for p in profiles]
    personas.append(luna_persona())
    return personas


def luna_persona() -> PersonaConfig:
    """Mood-switching persona: rotates profiles every 30 cycles.

    The rotation is ordered so that both an inattentive-slow back to
    attentive-clever switch (cycle 30) and an attentive-clever to
    attentive-slow switch (cycle 60) occur early enough to be observed
    even in shorter sessions.
    """
    moods = [
        PersonaCore("I-S", p_no=0.7, p_bc=0.2, p_s=0.1, p_pos=0.3, p_neg=0.7),
        PersonaCore("A-C", p_no=0.1, p_bc=0.6, p_s=0.3, p_pos=0.7, p_neg=0.3),
        PersonaCore("A-S", p_no=0.1, p_bc=0.6, p_s=0.3, p_pos=0.3, p_neg=0.7),
        PersonaCore("I-C", p_no=0.7, p_bc=0.2, p_s=0.1, p_pos=0.7, p_neg=0.3),
    ]
    return PersonaConfig(name="Luna", mode_schedule=moods,
                         mode_length=30).validate()
