"""Seeded UCT search over the per-turn decision process.

Chance nodes model uptake: after a move is chosen, the transition either
succeeds (the predicted understanding applies) or the state stays unchanged.
A simulation's value is the cumulated reward of the moves along its path.
The search is deterministic for a fixed seed and returns the best two root
moves, ranked by mean value with enumeration order breaking ties.
"""

from __future__ import annotations

import math
import random
from typing import Optional

from .planning import (BlockView, EngineConfig, MdpState, MovePlan,
                       apply_plan, enumerate_valid_moves)


class NoValidMoveError(RuntimeError):
    pass


class _Node:
    __slots__ = ("state", "plans", "visits", "edge_visits", "edge_values",
                 "children", "next_untried")

    def __init__(self, state: MdpState, view: BlockView, cfg: EngineConfig):
        self.state = state
        self.plans = enumerate_valid_moves(state, view, cfg)
        self.visits = 0
        self.edge_visits = [0] * len(self.plans)
        self.edge_values = [0.0] * len(self.plans)
        self.children: dict[tuple[int, bool], _Node] = {}
        self.next_untried = 0

    @property
    def terminal(self) -> bool:
        return not self.plans


class MctsSolver:
    def __init__(self, graph, cfg: EngineConfig, block: str):
        self.view = BlockView(graph, block)
        self.cfg = cfg

    def solve(self, state: MdpState, seed: Optional[int] = None) -> list[MovePlan]:
        """Runs the configured simulation budget and returns the top two plans.

        Plans that share action, targets, and reward are renditions of the
        same content; their edge statistics are pooled for the ranking and
        the rendition is then chosen by exact expected understanding gain.
        This keeps the ranking noise-free where simulations cannot separate
        siblings, while distinct target choices still compete on value.
        """
        cfg = self.cfg
        rng = random.Random(cfg.mcts_seed if seed is None else seed)
        root = _Node(state, self.view, cfg)
        if root.terminal:
            raise NoValidMoveError("state admits no valid moves")
        if len(root.plans) == 1:
            return [root.plans[0]]
        for _ in range(cfg.mcts_iterations):
            self._simulate(root, depth=0, rng=rng)

        groups: dict[tuple, list[int]] = {}
        for i, plan in enumerate(root.plans):
            groups.setdefault((plan.action, plan.targets, plan.reward), []).append(i)
        ranked_groups = []
        for key, members in groups.items():
            visits = sum(root.edge_visits[i] for i in members)
            value = sum(root.edge_values[i] for i in members)
            # Rounding keeps mathematically tied groups tied despite
            # accumulation order; true value gaps are far larger.
            q = round(value / visits, 12) if visits else -math.inf
            members.sort(key=lambda i: (-self._expected_gain(root.state,
                                                             root.plans[i]), i))
            ranked_groups.append((q, members[0], members))
        ranked_groups.sort(key=lambda item: (-item[0], item[1]))
        # Best rendition of each content choice first; a same-content sibling
        # would waste the second slot on a redundant utterance.
        ordered = [best for _, best, _ in ranked_groups]
        ordered.extend(i for _, _, members in ranked_groups
                       for i in members[1:])
        return [root.plans[i] for i in ordered[:2]]

    @staticmethod
    def _expected_gain(state: MdpState, plan: MovePlan) -> float:
        t = plan.transition_prob
        return sum(t * (pred - state.lous.get(tid, 0.0))
                   for tid, pred in plan.predicted_lou.items())

    def _simulate(self, node: _Node, depth: int, rng: random.Random) -> float:
        if depth >= self.cfg.horizon or node.terminal:
            return 0.0
        if node.next_untried < len(node.plans):
            idx = node.next_untried
            node.next_untried += 1
            plan = node.plans[idx]
            success = rng.random() < plan.transition_prob
            child = self._child(node, idx, success)
            value = plan.reward + self._rollout(child.state, depth + 1, rng)
        else:
            idx = self._select(node)
            plan = node.plans[idx]
            success = rng.random() < plan.transition_prob
            child = self._child(node, idx, success)
            value = plan.reward + self._simulate(child, depth + 1, rng)
        node.visits += 1
        node.edge_visits[idx] += 1
        node.edge_values[idx] += value
        return value

    def _select(self, node: _Node) -> int:
        log_n = math.log(node.visits)
        c = self.cfg.mcts_exploration
        best_idx, best_score = 0, -math.inf
        for i in range(len(node.plans)):
            n = node.edge_visits[i]
            score = node.edge_values[i] / n + c * math.sqrt(log_n / n)
            if score > best_score:
                best_idx, best_score = i, score
        return best_idx

    def _child(self, node: _Node, idx: int, success: bool) -> _Node:
        key = (idx, success)
        child = node.children.get(key)
        if child is None:
            state = apply_plan(node.state, node.plans[idx], self.view,
                               self.cfg, success)
            child = _Node(state, self.view, self.cfg)
            node.children[key] = child
        return child

    def _rollout(self, state: MdpState, depth: int, rng: random.Random) -> float:
        total = 0.0
        while depth < self.cfg.horizon:
            plans = enumerate_valid_moves(state, self.view, self.cfg)
            if not plans:
                break
            plan = plans[rng.randrange(len(plans))]
            total += plan.reward
            state = apply_plan(state, plan, self.view, self.cfg,
                               rng.random() < plan.transition_prob)
            depth += 1
        return total


def solve(state: MdpState, graph, cfg: EngineConfig,
          seed: Optional[int] = None) -> list[MovePlan]:
    """One-shot search for the best two moves in the given state."""
    return MctsSolver(graph, cfg, state.block).solve(state, seed)
