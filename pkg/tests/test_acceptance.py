"""Acceptance suite: one test per release criterion, each with its stated
tolerance and runtime budget.  Every test prints a PASS line; run with
``pytest tests/test_acceptance.py -s`` to see them."""

import math
import random
import time

import numpy as np
import pytest

from petsocial.emotion import (
    EMOTIONS,
    Emotion,
    EmotionState,
    PersonalityVector,
    StimulusTrace,
    TransitionStats,
    personality_update,
    step,
    top_k_distribution,
    transition_probabilities,
)
from petsocial.graph import SocialGraph
from petsocial.perception import (
    batchnorm_infer,
    default_confusion_matrix,
    depthwise_separable_conv,
    full_parameter_count,
    noisy_recognize,
    residual_apply,
    separable_parameter_count,
    softmax,
)
from petsocial.recommend import RecommendParams, network_candidates, recommend
from petsocial.rewards import RewardParams, edge_weight, total_reward
from petsocial.simulator import SimConfig, run

import reference_forward
from conftest import make_user, random_graph
from test_emotion import _rk4_step_response
from test_recommend import oracle_components, oracle_network_score


class budget:
    """Assert the block stays inside the criterion's runtime budget."""

    def __init__(self, seconds, label):
        self.seconds = seconds
        self.label = label

    def __enter__(self):
        self.start = time.time()
        return self

    def __exit__(self, exc_type, *rest):
        elapsed = time.time() - self.start
        if exc_type is None:
            assert elapsed < self.seconds, \
                f"{self.label}: {elapsed:.2f}s exceeds {self.seconds}s budget"
            print(f"PASS: {self.label} ({elapsed:.2f}s)")
        return False


def test_c01_logistic_weight_suite():
    with budget(1.0, "logistic edge-weight suite: midpoint, monotone, bounded, inflection"):
        rng = random.Random(101)
        for _ in range(100):
            params = RewardParams(q1=rng.uniform(0.1, 5.0), p1=rng.uniform(0.02, 0.15),
                                  c1=rng.uniform(0.0, 30.0))
            assert edge_weight(params.c1, params) == params.q1 / 2  # exact midpoint
            prev = edge_weight(0, params)
            assert 0.0 < prev < params.q1
            for m in range(1, 201):
                cur = edge_weight(m, params)
                assert cur > prev and 0.0 < cur < params.q1
                prev = cur
        params = RewardParams(q1=1.0, p1=0.5, c1=10.0)
        d2 = lambda m: (edge_weight(m + 1, params) - 2 * edge_weight(m, params)
                        + edge_weight(m - 1, params))
        assert all(d2(m) > 0 for m in range(1, 10))
        assert all(d2(m) < 0 for m in range(11, 20))


def test_c02_total_reward_linearity():
    with budget(1.0, "total reward linear in alpha, recoverable from R(0), R(1)"):
        rng = random.Random(103)
        for _ in range(100):
            g = random_graph(rng, n_users=rng.randrange(2, 10), edge_prob=0.4)
            user = "u0"
            r0 = total_reward(g, user, RewardParams(alpha=0.0))
            r1 = total_reward(g, user, RewardParams(alpha=1.0))
            for _ in range(3):
                alpha = rng.random()
                want = alpha * r1 + (1 - alpha) * r0
                got = total_reward(g, user, RewardParams(alpha=alpha))
                assert abs(got - want) <= 1e-9


def test_c03_network_score_oracle():
    with budget(30.0, "network score and ranking match exhaustive oracle on 500 graphs"):
        rng = random.Random(107)
        scored_pairs = 0
        rankings = 0
        for _ in range(500):
            g = random_graph(rng, n_users=rng.randrange(4, 13), edge_prob=0.35)
            params = RecommendParams(alpha_net=rng.random(), sim_threshold=0.0,
                                     dist_threshold_km=1e6, top_n=20)
            users = list(g.users)
            for u in users:
                for v in users:
                    if u >= v or v in g.neighbors(u):
                        continue
                    comps = oracle_components(g, u, v)
                    if not comps:
                        continue
                    from petsocial.recommend import network_score
                    got = network_score(g, u, v, params)
                    assert abs(got - oracle_network_score(g, u, v, params)) <= 1e-9
                    scored_pairs += 1
            probe = users[rng.randrange(len(users))]
            got_rank = [r.candidate for r in network_candidates(g, probe, params)]
            rows = []
            for v in users:
                if v == probe or v in g.neighbors(probe):
                    continue
                if not oracle_components(g, probe, v):
                    continue
                rows.append((-oracle_network_score(g, probe, v, params),
                             g.distance_km(probe, v), v))
            rows.sort()
            assert got_rank == [r[2] for r in rows[:params.top_n]]
            rankings += 1
        assert scored_pairs > 2000 and rankings == 500


def test_c04_gate_soundness():
    with budget(30.0, "zero gate violations across 10^4 randomized recommend calls"):
        rng = random.Random(109)
        graphs = [random_graph(rng, n_users=rng.randrange(4, 15),
                               edge_prob=rng.random() * 0.5) for _ in range(100)]
        for g in graphs:
            if rng.random() < 0.5:
                g.advance_clock(rng.uniform(0, 10))
        for trial in range(10 ** 4):
            g = graphs[trial % len(graphs)]
            params = RecommendParams(sim_threshold=rng.random(),
                                     dist_threshold_km=rng.uniform(1, 50),
                                     top_n=rng.randrange(1, 9))
            user = f"u{rng.randrange(len(g.users))}"
            for rec in recommend(g, user, params):
                assert rec.candidate != user
                assert rec.candidate not in g.neighbors(user)
                assert g.distance_km(user, rec.candidate) <= params.dist_threshold_km
                if rec.phase == "similarity":
                    assert rec.score >= params.sim_threshold


def test_c05_probability_normalization():
    with budget(5.0, "transition probabilities sum to 1 +/- 1e-9 on 10^4 random states"):
        rng = np.random.default_rng(113)
        for _ in range(10 ** 4):
            stats = TransitionStats(rng.uniform(0.0, 5.0, (7, 7)) + 1e-3)
            w = PersonalityVector(tuple(rng.uniform(0.05, 4.0, 7)))
            stimuli = tuple(rng.uniform(0.0, 2.0, 4))
            p = transition_probabilities(EMOTIONS[int(rng.integers(7))], stimuli, stats, w)
            assert abs(p.sum() - 1.0) <= 1e-9
            assert np.all(p > 0)


def test_c06_personality_growth_closed_form():
    with budget(1.0, "n compounded personality updates equal (1+beta)^n"):
        for beta in (0.01, 0.05, 0.2):
            w = PersonalityVector.uniform(1.0, beta=beta)
            for n in range(1, 60):
                w = personality_update(w, Emotion.HAPPY)
                assert abs(w.of(Emotion.HAPPY) - (1 + beta) ** n) <= 1e-9 * (1 + beta) ** n


def test_c07_stimulus_curve():
    with budget(5.0, "decay hits e^-1 at one time constant; rise matches ODE oracle"):
        for tc in (1.0, 3.0, 10.0):
            trace = StimulusTrace("S1", 1.0, onset=0.0, tc=tc)
            ratio = trace.value(trace.peak_time + tc) / trace.y_peak
            assert abs(ratio - math.exp(-1.0)) <= 1e-9
        trace = StimulusTrace("S2", 1.0, onset=0.0, tc=2.0, xi=1.0)
        for frac in (0.2, 0.5, 0.8, 1.0):
            t = frac * trace.rise_duration
            numeric = _rk4_step_response(1.0, 1.0, trace.wn, t)
            assert abs(trace.value(t) - numeric) <= 1e-4


def test_c08_top_k_sampling_frequencies():
    with budget(10.0, "top-k sampling matches renormalized distribution over 10^5 draws"):
        p = np.array([0.35, 0.05, 0.02, 0.28, 0.05, 0.05, 0.2])
        k = 3
        expected = top_k_distribution(p, k)
        rng = np.random.default_rng(127)
        state = EmotionState(current=Emotion.NEUTRAL,
                             personality=PersonalityVector.uniform(1.0),
                             stats=TransitionStats(np.ones((7, 7))), k=k)
        frozen = state.personality
        counts = np.zeros(7)
        for _ in range(10 ** 5):
            state.personality = frozen
            state.last_p = p
            counts[step(state, rng).index] += 1
        freq = counts / counts.sum()
        assert np.all(np.abs(freq - expected) <= 0.01)


def test_c09_confusion_matrix_anchors():
    with budget(10.0, "recognition anchors 0.83/0.42 and column stochasticity"):
        cm = default_confusion_matrix()
        assert np.all(np.abs(cm.matrix.sum(axis=0) - 1.0) <= 1e-9)
        for raw in cm.raw_column_sums:
            assert abs(raw - 1.0) <= 0.02 + 1e-12
        rng = np.random.default_rng(131)
        draws = 10 ** 5
        happy = sum(noisy_recognize(Emotion.HAPPY, cm, rng) == Emotion.HAPPY
                    for _ in range(draws))
        assert abs(happy / draws - 0.83) <= 0.01
        fear = sum(noisy_recognize(Emotion.FEAR, cm, rng) == Emotion.FEAR
                   for _ in range(draws))
        assert abs(fear / draws - 0.42) <= 0.01


def test_c10_perception_kernels():
    with budget(30.0, "separable conv oracle, parameter ratio, BN, residual, softmax"):
        rng = np.random.default_rng(137)
        for _ in range(50):
            k = int(rng.choice([1, 3, 5]))
            c_in, c_out = int(rng.integers(1, 4)), int(rng.integers(1, 5))
            h = int(rng.integers(4, 9))
            x = rng.normal(0, 1, (h, h, c_in))
            dw = rng.normal(0, 1, (k, k, c_in))
            pw = rng.normal(0, 1, (c_in, c_out))
            full = np.einsum("klc,co->klco", dw, pw)
            fast = depthwise_separable_conv(x, dw, pw)
            naive = reference_forward.conv_full(x, full)
            assert np.max(np.abs(fast - naive)) < 1e-6
            ratio = separable_parameter_count(k, c_in, c_out) / full_parameter_count(k, c_in, c_out)
            assert ratio == 1 / c_out + 1 / k ** 2 or abs(ratio - (1 / c_out + 1 / k ** 2)) < 1e-15
        out = batchnorm_infer(np.array([[3.0]]), mean=1.0, variance=4.0,
                              gamma=2.0, beta=0.5, eps=0.0)
        assert out[0, 0] == 2.5
        x = rng.normal(0, 1, (5, 5, 3))
        assert np.array_equal(residual_apply(x, lambda t: np.zeros_like(t)), x)
        for _ in range(50):
            logits = rng.normal(0, 4, 7)
            p = softmax(logits)
            assert np.all(p > 0) and abs(p.sum() - 1.0) <= 1e-9
            assert np.max(np.abs(p - softmax(logits + 13.7))) <= 1e-9


def test_c11_simulator_reproducible_and_directional():
    with budget(60.0, "default 400-agent/12-week run: reproducible, directional, monotone"):
        config = SimConfig()
        first = run(config)
        assert first == run(config)  # bit-identical metrics

        off = SimConfig(mechanism_enabled=False)
        quiet = run(off)
        assert quiet.treatment_time == quiet.control_time
        assert quiet.treatment_circle == quiet.control_circle

        assert first.treatment_circle[-1] > first.control_circle[-1]
        assert first.treatment_time[-1] > first.control_time[-1]
        # golden magnitudes for the default seed
        assert first.treatment_circle[-1] == pytest.approx(9.21, abs=1e-9)
        assert first.control_circle[-1] == pytest.approx(2.97, abs=1e-9)

        finals = []
        for tasks in (0, 4, 8, 16):
            finals.append(run(SimConfig(tasks_per_week=tasks)).treatment_circle[-1])
        assert all(a <= b + 1e-12 for a, b in zip(finals, finals[1:]))
