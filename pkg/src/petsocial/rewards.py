"""Reward mechanics: logistic edge weights, blended totals, and the grant ledger.

An edge between two users is worth ``q1 / (1 + exp(-p1 * (m - c1)))`` where
``m`` is the number of offline tasks they finished together.  The growth rate
rises until ``m`` reaches the threshold ``c1`` and slows after it, so early
meetings pay off quickly while grinding a single friendship saturates.

A user's total reward blends edge weights with their collective-activity count:
``R = alpha * sum(edge weights) + (1 - alpha) * w``.  ``alpha`` is a platform
knob and may be swapped at runtime.

Grants fall into four categories: mission completion, random outdoor finds,
milestone achievements, and offline (physical) handouts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import UnknownUserError

CATEGORIES = ("complete_mission", "surprise_collective", "achievement_based", "offline")


@dataclass(frozen=True)
class RewardParams:
    """Knobs of the reward computation.

    alpha: blend between edge weights and collective activities, in [0, 1].
    q1: ceiling of an edge's weight (> 0).
    p1: steepness of the logistic growth (> 0).
    c1: task-count threshold where growth flips from speeding up to slowing
        down (>= 0).
    """

    alpha: float = 0.6
    q1: float = 1.0
    p1: float = 0.8
    c1: float = 5.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0,1], got {self.alpha}")
        if self.q1 <= 0:
            raise ValueError(f"q1 must be positive, got {self.q1}")
        if self.p1 <= 0:
            raise ValueError(f"p1 must be positive, got {self.p1}")
        if self.c1 < 0:
            raise ValueError(f"c1 must be >= 0, got {self.c1}")


def edge_weight(m: int | float, params: RewardParams) -> float:
    """Logistic weight of an edge after ``m`` finished tasks."""
    if m < 0:
        raise ValueError(f"task count must be >= 0, got {m}")
    # exp argument is negated so large m saturates toward q1 without overflow
    z = -params.p1 * (m - params.c1)
    if z > 700.0:
        return params.q1 * math.exp(-z)  # underflow-safe tail
    return params.q1 / (1.0 + math.exp(z))


def total_reward(graph, user_id: str, params: RewardParams | None = None) -> float:
    """Blended total reward of a user over the current graph."""
    if user_id not in graph.users:
        raise UnknownUserError(user_id)
    p = params or graph.reward_params
    profile = graph.users[user_id]
    edge_sum = sum(edge_weight(graph.edge(user_id, nb).m, p)
                   for nb in graph.neighbors(user_id))
    return p.alpha * edge_sum + (1.0 - p.alpha) * profile.collective_activities


@dataclass(frozen=True)
class RewardEvent:
    user_id: str
    category: str
    payload: str
    at: float = 0.0


@dataclass
class RewardConfig:
    """Declarative reward configuration.

    File form is JSON with keys:
      alpha, q1, p1, c1          -- reward parameters
      task_prop                  -- prop granted per completed mission
      surprise_table             -- {prop_id: probability}; remainder = nothing
      milestones                 -- {"<task count>": badge name}
    """

    params: RewardParams = field(default_factory=RewardParams)
    task_prop: str = "ration"
    surprise_table: dict[str, float] = field(default_factory=lambda: {"ration": 0.2, "toy": 0.1})
    milestones: dict[int, str] = field(default_factory=lambda: {1: "first-task", 10: "10-tasks", 50: "50-tasks"})

    def __post_init__(self):
        total = sum(self.surprise_table.values())
        if any(p < 0 for p in self.surprise_table.values()) or total > 1.0 + 1e-9:
            raise ValueError("surprise table probabilities must be >= 0 and sum to <= 1")


def load_reward_config(path) -> RewardConfig:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return reward_config_from_dict(raw)


def reward_config_from_dict(raw: dict) -> RewardConfig:
    params = RewardParams(
        alpha=raw.get("alpha", 0.6), q1=raw.get("q1", 1.0),
        p1=raw.get("p1", 0.8), c1=raw.get("c1", 5.0))
    cfg = RewardConfig(params=params)
    if "task_prop" in raw:
        cfg.task_prop = raw["task_prop"]
    if "surprise_table" in raw:
        cfg.surprise_table = {str(k): float(v) for k, v in raw["surprise_table"].items()}
    if "milestones" in raw:
        cfg.milestones = {int(k): str(v) for k, v in raw["milestones"].items()}
    return RewardConfig(params, cfg.task_prop, cfg.surprise_table, cfg.milestones)


def save_reward_config(cfg: RewardConfig, path) -> None:
    raw = {"alpha": cfg.params.alpha, "q1": cfg.params.q1, "p1": cfg.params.p1,
           "c1": cfg.params.c1, "task_prop": cfg.task_prop,
           "surprise_table": cfg.surprise_table,
           "milestones": {str(k): v for k, v in cfg.milestones.items()}}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(raw, fh, indent=2)


@dataclass
class UserLedger:
    props: dict[str, int] = field(default_factory=dict)
    physical: list[str] = field(default_factory=list)
    achievements: list[tuple[str, float]] = field(default_factory=list)
    completed_tasks: int = 0


class RewardLedger:
    """Per-user reward state with an append-only history.

    Wire it to a graph with ``attach(graph)``: every completed task then grants
    the configured mission prop and checks achievement milestones.
    """

    def __init__(self, config: RewardConfig | None = None):
        self.config = config or RewardConfig()
        self.history: list[RewardEvent] = []
        self._users: dict[str, UserLedger] = {}

    def user(self, user_id: str) -> UserLedger:
        return self._users.setdefault(user_id, UserLedger())

    def grant(self, user_id: str, category: str, payload: str, at: float = 0.0) -> RewardEvent:
        if category not in CATEGORIES:
            raise ValueError(f"unknown reward category: {category!r}")
        event = RewardEvent(user_id, category, payload, at)
        self.history.append(event)
        entry = self.user(user_id)
        if category in ("complete_mission", "surprise_collective"):
            entry.props[payload] = entry.props.get(payload, 0) + 1
        elif category == "achievement_based":
            entry.achievements.append((payload, at))
        else:
            entry.physical.append(payload)
        return event

    def attach(self, graph) -> None:
        graph.on_task_completed(self._on_completion)

    def _on_completion(self, event) -> None:
        for user_id in (event.u, event.v):
            entry = self.user(user_id)
            entry.completed_tasks += 1
            self.grant(user_id, "complete_mission", self.config.task_prop, event.at)
            badge = self.config.milestones.get(entry.completed_tasks)
            if badge is not None:
                self.grant(user_id, "achievement_based", badge, event.at)

    def outdoor_tick(self, user_id: str, rng, at: float = 0.0) -> Optional[RewardEvent]:
        """Roll the surprise table once; returns the grant or None."""
        u = rng.random()
        cum = 0.0
        for prop, prob in self.config.surprise_table.items():
            cum += prob
            if u < cum:
                return self.grant(user_id, "surprise_collective", prop, at)
        return None

    def achievements_of(self, user_id: str) -> list[str]:
        return [badge for badge, _ in self.user(user_id).achievements]
