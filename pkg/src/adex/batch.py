"""Batch simulation: run personas against the engine and export statistics."""

from __future__ import annotations

import csv
import json
import random
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .engine import Session, interaction_length, new_session, step
from .graph import KnowledgeGraph
from .partner import DbnParameters
from .personas import PersonaConfig, sample_feedback
from .planning import EngineConfig

SHORT_KEYS = {"expertise": "e", "load": "l", "attentiveness": "a",
              "cooperativeness": "c"}


def desk_profile() -> EngineConfig:
    """Reduced search budget for batch evaluation on a single desktop core.

    Rankings are stable well below the interactive default budget because
    the per-turn move sets are small; this keeps a full evaluation batch
    within minutes.
    """
    return EngineConfig(mcts_iterations=128, horizon=4)


@dataclass
class RunResult:
    run_id: str
    persona: str
    seed: int
    length: int
    converged: bool
    action_counts: dict[str, int]
    move_counts: dict[str, dict[str, int]]
    trajectory: list[dict[str, float]]
    cycle_rows: list[dict]
    substantive_count: int


@dataclass
class BatchStats:
    runs: list[RunResult] = field(default_factory=list)

    def personas(self) -> list[str]:
        seen = dict.fromkeys(r.persona for r in self.runs)
        return list(seen)

    def runs_for(self, persona: str) -> list[RunResult]:
        return [r for r in self.runs if r.persona == persona]

    def lengths(self, persona: str) -> list[int]:
        return [r.length for r in self.runs_for(persona)]

    def mean_length(self, persona: str) -> float:
        return statistics.fmean(self.lengths(persona))

    def std_length(self, persona: str) -> float:
        lengths = self.lengths(persona)
        return statistics.stdev(lengths) if len(lengths) > 1 else 0.0

    def action_counts(self, persona: str) -> dict[str, int]:
        totals: dict[str, int] = {}
        for r in self.runs_for(persona):
            for action, n in r.action_counts.items():
                totals[action] = totals.get(action, 0) + n
        return totals

    def move_counts(self, persona: str, action: str) -> dict[str, int]:
        totals: dict[str, int] = {}
        for r in self.runs_for(persona):
            for move, n in r.move_counts.get(action, {}).items():
                totals[move] = totals.get(move, 0) + n
        return totals

    def mean_expectation(self, persona: str, feature: str) -> float:
        values = [pm[feature] for r in self.runs_for(persona)
                  for pm in r.trajectory]
        return statistics.fmean(values)

    def boundary_agreement(self, persona: str, boundary_cycle: int,
                           window: int = 12) -> tuple[int, int, int]:
        """Sign statistics of a mood-boundary effect on expected expertise.

        Returns (rises, falls, evaluable runs) comparing the windowed mean
        of E(expertise) before and after the boundary cycle.
        """
        rises = falls = usable = 0
        for r in self.runs_for(persona):
            traj = [pm["expertise"] for pm in r.trajectory]
            if len(traj) < boundary_cycle + window:
                continue
            before = traj[boundary_cycle - window:boundary_cycle]
            after = traj[boundary_cycle:boundary_cycle + window]
            if not before or not after:
                continue
            usable += 1
            delta = statistics.fmean(after) - statistics.fmean(before)
            if delta > 0:
                rises += 1
            elif delta < 0:
                falls += 1
        return rises, falls, usable


def run_simulation(graph: KnowledgeGraph, persona: PersonaConfig,
                   cfg: Optional[EngineConfig] = None,
                   params: Optional[DbnParameters] = None,
                   seed: int = 0, run_id: Optional[str] = None) -> tuple[Session, RunResult]:
    """One full session against a simulated explainee, deterministic per seed."""
    persona.validate()
    session = new_session(graph, cfg, params, seed=seed)
    rng = random.Random(seed if persona.rng_seed is None else persona.rng_seed)
    action_counts: dict[str, int] = {}
    move_counts: dict[str, dict[str, int]] = {}
    cycle_rows: list[dict] = []
    substantive = 0
    while not session.done:
        fb = sample_feedback(persona, session.cycle_count, session, rng)
        if fb.kind == "substantive":
            substantive += 1
        turn = step(session, fb)
        for plan in turn.plans:
            action_counts[plan.action] = action_counts.get(plan.action, 0) + 1
            per_action = move_counts.setdefault(plan.action, {})
            per_action[plan.move] = per_action.get(plan.move, 0) + 1
        if turn.plans:
            first = turn.plans[0]
            cycle_rows.append({
                "cycle": turn.cycle,
                "e": turn.pm["expertise"], "l": turn.pm["load"],
                "a": turn.pm["attentiveness"], "c": turn.pm["cooperativeness"],
                "action": first.action, "move": first.move,
                "reward": first.reward,
            })
    rid = run_id or f"{persona.name}-{seed}"
    result = RunResult(run_id=rid, persona=persona.name, seed=seed,
                       length=interaction_length(session),
                       converged=session.converged,
                       action_counts=action_counts, move_counts=move_counts,
                       trajectory=list(session.trajectory),
                       cycle_rows=cycle_rows, substantive_count=substantive)
    return session, result


def run_batch(graph: KnowledgeGraph, personas: list[PersonaConfig],
              cfg: Optional[EngineConfig] = None,
              params: Optional[DbnParameters] = None,
              n_runs: int = 20, base_seed: int = 7,
              out_dir: Optional[Path] = None) -> BatchStats:
    """n_runs sessions per persona; optionally writes the tabular exports."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    stats = BatchStats()
    for p_index, persona in enumerate(personas):
        for run_index in range(n_runs):
            seed = base_seed + p_index * 10007 + run_index
            rid = f"{persona.name}-{run_index:03d}"
            _, result = run_simulation(graph, persona, cfg, params,
                                       seed=seed, run_id=rid)
            stats.runs.append(result)
    if out_dir is not None:
        write_exports(stats, Path(out_dir))
    return stats


def write_exports(stats: BatchStats, out_dir: Path) -> dict[str, Path]:
    """Writes runs.csv, cycles.csv, and summary.json."""
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "runs": out_dir / "runs.csv",
        "cycles": out_dir / "cycles.csv",
        "summary": out_dir / "summary.json",
    }
    with paths["runs"].open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run_id", "persona", "seed", "length", "converged"])
        for r in stats.runs:
            writer.writerow([r.run_id, r.persona, r.seed, r.length, r.converged])
    with paths["cycles"].open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run_id", "persona", "cycle", "e", "l", "a", "c",
                         "action", "move", "reward"])
        for r in stats.runs:
            for row in r.cycle_rows:
                writer.writerow([r.run_id, r.persona, row["cycle"],
                                 row["e"], row["l"], row["a"], row["c"],
                                 row["action"], row["move"], row["reward"]])
    summary = {
        "personas": {
            persona: {
                "runs": len(stats.runs_for(persona)),
                "mean_length": stats.mean_length(persona),
                "std_length": stats.std_length(persona),
                "actions": stats.action_counts(persona),
                "moves": {action: stats.move_counts(persona, action)
                          for action in sorted(stats.action_counts(persona))},
                "mean_expectations": {
                    SHORT_KEYS[f]: stats.mean_expectation(persona, f)
                    for f in SHORT_KEYS},
            }
            for persona in stats.personas()
        }
    }
    with paths["summary"].open("w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


def export_transcript(session: Session, path: Path) -> None:
    """Line-delimited transcript export, one record per executed plan."""
    with Path(path).open("w") as fh:
        for record in session.transcript:
            fh.write(json.dumps(record.as_dict(), sort_keys=True) + "\n")
