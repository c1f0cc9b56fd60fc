import random

import pytest

from petsocial.graph import SocialGraph, UserProfile
from petsocial.rewards import RewardParams, edge_weight


def make_user(uid, lat=0.0, lon=0.0, attrs=(0.5, 0.5), prefs=(0.5, 0.5, 0.5), w=0):
    return UserProfile(uid, lat, lon, attrs, prefs, w)


@pytest.fixture
def empty_graph():
    return SocialGraph(RewardParams())


@pytest.fixture
def small_graph():
    g = SocialGraph(RewardParams())
    for i in range(6):
        g.add_user(make_user(f"u{i}", lat=0.01 * i, lon=0.01 * i,
                             attrs=(0.1 * i, 0.5), prefs=(0.2, 0.3, 0.1 * i)))
    return g


def random_graph(rng: random.Random, n_users=10, edge_prob=0.3,
                 area_deg=0.3) -> SocialGraph:
    """Small random graph with profiles inside a tight geographic box."""
    g = SocialGraph(RewardParams())
    for i in range(n_users):
        g.add_user(UserProfile(
            f"u{i}", rng.uniform(0, area_deg), rng.uniform(0, area_deg),
            tuple(rng.random() for _ in range(3)),
            tuple(rng.random() for _ in range(4)),
            rng.randrange(0, 5)))
    for i in range(n_users):
        for j in range(i + 1, n_users):
            if rng.random() < edge_prob:
                edge = g.add_edge(f"u{i}", f"u{j}")
                edge.m = rng.randrange(1, 8)
                edge.weight = edge_weight(edge.m, g.reward_params)
    return g
