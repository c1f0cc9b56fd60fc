import math
import random

import numpy as np
import pytest

from petsocial.errors import UnknownUserError
from petsocial.graph import SocialGraph
from petsocial.rewards import (
    RewardConfig,
    RewardLedger,
    RewardParams,
    edge_weight,
    load_reward_config,
    save_reward_config,
    total_reward,
)

from conftest import make_user


# ----------------------------------------------------------------- edge weight


def test_midpoint_is_half_ceiling():
    for q1, p1, c1 in [(1.0, 1.0, 5.0), (2.5, 0.3, 12.0), (0.7, 2.0, 1.0)]:
        params = RewardParams(q1=q1, p1=p1, c1=c1)
        assert edge_weight(c1, params) == pytest.approx(q1 / 2, rel=1e-12)


def test_asymptote():
    params = RewardParams(q1=1.0, p1=1.0, c1=5.0)
    assert abs(edge_weight(100, params) - 1.0) < 1e-9


def test_frozen_value_against_high_precision_oracle():
    # mpmath, 50 digits: 2 / (1 + e^5) = 0.013385701848569711119...
    params = RewardParams(q1=2.0, p1=0.5, c1=10.0)
    assert edge_weight(0, params) == pytest.approx(0.013385701848569711, abs=1e-15)


def test_invalid_params_rejected():
    with pytest.raises(ValueError):
        RewardParams(q1=0.0)
    with pytest.raises(ValueError):
        RewardParams(p1=-1.0)
    with pytest.raises(ValueError):
        RewardParams(alpha=1.5)
    with pytest.raises(ValueError):
        edge_weight(-1, RewardParams())


def test_monotonic_and_bounded():
    # steepness capped so exp(-p1*(200-c1)) stays well above float64 epsilon;
    # beyond that the open bound is true but indistinguishable from q1
    rng = random.Random(23)
    for _ in range(100):
        params = RewardParams(q1=rng.uniform(0.1, 5.0), p1=rng.uniform(0.02, 0.15),
                              c1=rng.uniform(0.0, 30.0))
        prev = edge_weight(0, params)
        assert 0.0 < prev < params.q1
        for m in range(1, 201):
            cur = edge_weight(m, params)
            assert cur > prev
            assert 0.0 < cur < params.q1
            prev = cur


def test_second_difference_flips_sign_at_threshold():
    params = RewardParams(q1=1.0, p1=0.5, c1=10.0)
    c1 = int(params.c1)
    diff2 = lambda m: (edge_weight(m + 1, params) - 2 * edge_weight(m, params)
                       + edge_weight(m - 1, params))
    for m in range(1, c1):
        assert diff2(m) > 0.0
    for m in range(c1 + 1, 2 * c1):
        assert diff2(m) < 0.0
    assert diff2(c1) == pytest.approx(0.0, abs=1e-12)  # logistic is symmetric there


# ----------------------------------------------------------------- total reward


def _graph_with_edges(weights_m, w_activities):
    g = SocialGraph(RewardParams())
    g.add_user(make_user("me", w=w_activities))
    for i, m in enumerate(weights_m):
        g.add_user(make_user(f"n{i}"))
        edge = g.add_edge("me", f"n{i}")
        edge.m = m
    return g


def _solve_m(target, params):
    """Invert the logistic: the task count whose weight equals ``target``."""
    return params.c1 - math.log(params.q1 / target - 1.0) / params.p1


def test_alpha_one_isolates_edge_term():
    params = RewardParams(alpha=1.0, q1=1.0, p1=1.0, c1=5.0)
    g = SocialGraph(params)
    g.add_user(make_user("me", w=3))
    for i, target in enumerate((0.5, 0.7)):
        g.add_user(make_user(f"n{i}"))
        edge = g.add_edge("me", f"n{i}")
        edge.m = _solve_m(target, params)
    assert total_reward(g, "me", params) == pytest.approx(1.2, abs=1e-12)


def test_alpha_zero_isolates_activity_term():
    params = RewardParams(alpha=0.0)
    g = _graph_with_edges([3, 9], w_activities=3)
    assert total_reward(g, "me", params) == pytest.approx(3.0, abs=1e-12)


def test_midblend_hand_value():
    # independent recomputation: 0.5 * (0.5 + 0.7) + 0.5 * 3 = 2.1
    params = RewardParams(alpha=0.5, q1=1.0, p1=1.0, c1=5.0)
    g = SocialGraph(params)
    g.add_user(make_user("me", w=3))
    for i, target in enumerate((0.5, 0.7)):
        g.add_user(make_user(f"n{i}"))
        edge = g.add_edge("me", f"n{i}")
        edge.m = _solve_m(target, params)
    assert total_reward(g, "me", params) == pytest.approx(2.1, abs=1e-12)


def test_unknown_user():
    g = _graph_with_edges([1], 0)
    with pytest.raises(UnknownUserError):
        total_reward(g, "ghost")


def test_linearity_in_alpha_random_graphs():
    rng = random.Random(31)
    for _ in range(100):
        n_edges = rng.randrange(0, 6)
        g = _graph_with_edges([rng.randrange(0, 20) for _ in range(n_edges)],
                              rng.randrange(0, 10))
        r0 = total_reward(g, "me", RewardParams(alpha=0.0))
        r1 = total_reward(g, "me", RewardParams(alpha=1.0))
        for alpha in (0.25, 0.5, rng.random()):
            expected = alpha * r1 + (1 - alpha) * r0
            got = total_reward(g, "me", RewardParams(alpha=alpha))
            assert got == pytest.approx(expected, abs=1e-9)


# ----------------------------------------------------------------- ledger


def test_mission_grant_per_completed_task():
    g = _graph_with_edges([], 0)
    g.add_user(make_user("pal"))
    ledger = RewardLedger(RewardConfig())
    ledger.attach(g)
    task = g.issue_task("me", "pal")
    g.complete_task(task.task_id)
    assert ledger.user("me").props == {"ration": 1}
    assert ledger.user("pal").props == {"ration": 1}
    assert [e.category for e in ledger.history].count("complete_mission") == 2


def test_surprise_table_frequencies():
    ledger = RewardLedger(RewardConfig(surprise_table={"propA": 0.3}))
    rng = np.random.default_rng(5)
    hits = 0
    for _ in range(10 ** 5):
        event = ledger.outdoor_tick("me", rng)
        hits += event is not None and event.payload == "propA"
    assert hits / 10 ** 5 == pytest.approx(0.3, abs=0.01)


def test_milestone_badge_exactly_once():
    g = SocialGraph(RewardParams())
    g.add_user(make_user("me"))
    for i in range(12):
        g.add_user(make_user(f"p{i}"))
    ledger = RewardLedger(RewardConfig(milestones={10: "10-tasks"}))
    ledger.attach(g)
    for i in range(12):
        task = g.issue_task("me", f"p{i}")
        g.complete_task(task.task_id)
    assert ledger.achievements_of("me").count("10-tasks") == 1


def test_history_append_only_traces_props():
    ledger = RewardLedger()
    ledger.grant("me", "complete_mission", "ration")
    ledger.grant("me", "surprise_collective", "toy")
    granted = sum(1 for e in ledger.history if e.user_id == "me"
                  and e.category in ("complete_mission", "surprise_collective"))
    assert granted == sum(ledger.user("me").props.values())
    with pytest.raises(ValueError):
        ledger.grant("me", "weird", "x")


def test_reward_config_round_trip(tmp_path):
    cfg = RewardConfig(RewardParams(alpha=0.4, q1=2.0, p1=0.3, c1=8.0),
                       task_prop="snack", surprise_table={"toy": 0.15},
                       milestones={5: "5-tasks"})
    path = tmp_path / "rewards.json"
    save_reward_config(cfg, path)
    loaded = load_reward_config(path)
    assert loaded.params == cfg.params
    assert loaded.task_prop == "snack"
    assert loaded.surprise_table == {"toy": 0.15}
    assert loaded.milestones == {5: "5-tasks"}
