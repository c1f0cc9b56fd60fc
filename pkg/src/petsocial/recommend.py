"""Two-phase friend recommendation.

Phase one matches on profile similarity, gated by a similarity floor and a
distance ceiling so every suggestion is socially plausible and offline-
reachable.  Once a region's graph stops growing (few new edges over a sliding
window), phase two takes over and ranks non-adjacent pairs by the structure of
their shared-neighbor subgraph blended with profile affinity:

    S = alpha * sum_i n_i * (m_i + 1)
        + (1 - alpha) * (sum_j e_j + E)

where the sum over ``i`` runs over connected components of the subgraph induced
on the common neighbors (n_i vertices, m_i edges), ``e_j`` averages a common
neighbor's similarity to both users, and ``E`` is the pair's own similarity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import (
    DimensionMismatchError,
    NoCommonNeighborsError,
    NotComparableError,
    UnknownUserError,
)
from .graph import SocialGraph, UserProfile


@dataclass(frozen=True)
class RecommendParams:
    sim_threshold: float = 0.3
    dist_threshold_km: float = 50.0
    alpha_net: float = 0.5
    top_n: int = 10
    stability_window: float = 4.0  # graph-clock units (weeks in the simulator)
    stability_rate: float = 1.0    # new edges per clock unit below which a region is stable

    def __post_init__(self):
        if not 0.0 <= self.sim_threshold <= 1.0:
            raise ValueError("sim_threshold must lie in [0,1]")
        if self.dist_threshold_km <= 0:
            raise ValueError("dist_threshold_km must be positive")
        if not 0.0 <= self.alpha_net <= 1.0:
            raise ValueError("alpha_net must lie in [0,1]")
        if self.top_n < 1:
            raise ValueError("top_n must be >= 1")
        if self.stability_window <= 0 or self.stability_rate < 0:
            raise ValueError("stability window/rate out of range")


@dataclass(frozen=True)
class Recommendation:
    candidate: str
    score: float
    phase: str  # similarity | network
    explanation: dict = field(default_factory=dict)


def similarity(u: UserProfile, v: UserProfile) -> float:
    """Cosine similarity of the concatenated preference and attribute vectors,
    clamped to [0, 1].  A zero vector has no direction; similarity is 0."""
    a = u.preferences + u.attributes
    b = v.preferences + v.attributes
    if len(a) != len(b):
        raise DimensionMismatchError(
            f"profile vector lengths differ: {len(a)} vs {len(b)}")
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(y * y for y in b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return min(1.0, max(0.0, dot / (na * nb)))


def similarity_candidates(graph: SocialGraph, user_id: str,
                          params: RecommendParams) -> list[Recommendation]:
    """Similarity-phase ranking: candidates above the similarity floor, inside
    the distance ceiling, and not already friends.  Sorted by similarity
    descending, then distance ascending, then id."""
    me = graph.user(user_id)
    friends = graph.neighbors(user_id)
    scored = []
    for other_id, other in graph.users.items():
        if other_id == user_id or other_id in friends:
            continue
        sim = similarity(me, other)
        if sim < params.sim_threshold:
            continue
        dist = graph.distance_km(user_id, other_id)
        if dist > params.dist_threshold_km:
            continue
        scored.append((sim, dist, other_id))
    scored.sort(key=lambda t: (-t[0], t[1], t[2]))
    return [Recommendation(cid, sim, "similarity",
                           {"similarity": sim, "distance_km": dist})
            for sim, dist, cid in scored[:params.top_n]]


def common_neighbor_decomposition(graph: SocialGraph, u: str, v: str
                                  ) -> list[tuple[int, int, frozenset[str]]]:
    """Connected components of the subgraph induced on N(u) & N(v).

    Returns (vertex count, edge count, members) per component, ordered by the
    smallest member id for determinism.
    """
    if u == v:
        raise NotComparableError("cannot decompose a user against itself")
    if v in graph.neighbors(u):
        raise NotComparableError(f"{u!r} and {v!r} are already adjacent")
    common = graph.neighbors(u) & graph.neighbors(v)
    components: list[tuple[int, int, frozenset[str]]] = []
    unseen = set(common)
    while unseen:
        start = min(unseen)
        members = {start}
        frontier = [start]
        while frontier:
            node = frontier.pop()
            for nb in graph.neighbors(node) & common:
                if nb not in members:
                    members.add(nb)
                    frontier.append(nb)
        unseen -= members
        edge_count = sum(1 for a in members for b in graph.neighbors(a) & members if a < b)
        components.append((len(members), edge_count, frozenset(members)))
    components.sort(key=lambda c: min(c[2]))
    return components


def network_score(graph: SocialGraph, u: str, v: str, params: RecommendParams,
                  components=None) -> float:
    """Blend of shared-circle structure and profile affinity for a non-adjacent
    pair with at least one common neighbor."""
    if components is None:
        components = common_neighbor_decomposition(graph, u, v)
    if not components:
        raise NoCommonNeighborsError(f"{u!r} and {v!r} share no neighbors")
    structure = sum(n * (m + 1) for n, m, _ in components)
    pu, pv = graph.user(u), graph.user(v)
    affinity = similarity(pu, pv)
    for _, _, members in components:
        for j in members:
            pj = graph.user(j)
            affinity += (similarity(pj, pu) + similarity(pj, pv)) / 2.0
    return params.alpha_net * structure + (1.0 - params.alpha_net) * affinity


def network_candidates(graph: SocialGraph, user_id: str,
                       params: RecommendParams) -> list[Recommendation]:
    """Network-phase ranking over distance-gated non-adjacent users that share
    at least one neighbor with ``user_id``."""
    graph.user(user_id)
    friends = graph.neighbors(user_id)
    scored = []
    for other_id in graph.users:
        if other_id == user_id or other_id in friends:
            continue
        components = common_neighbor_decomposition(graph, user_id, other_id)
        if not components:
            continue
        dist = graph.distance_km(user_id, other_id)
        if dist > params.dist_threshold_km:
            continue
        score = network_score(graph, user_id, other_id, params, components)
        scored.append((score, dist, other_id, components))
    scored.sort(key=lambda t: (-t[0], t[1], t[2]))
    return [Recommendation(cid, score, "network",
                           {"score": score, "distance_km": dist,
                            "components": [(n, m) for n, m, _ in comps]})
            for score, dist, cid, comps in scored[:params.top_n]]


def is_stable(graph: SocialGraph, params: RecommendParams) -> bool:
    """A region counts as settled once it has lived through a full window, owns
    at least one edge, and grew new edges slower than the configured rate."""
    if graph.clock < params.stability_window or not graph.edges:
        return False
    recent = graph.new_edge_count_since(graph.clock - params.stability_window)
    return recent / params.stability_window < params.stability_rate


def recommend(graph: SocialGraph, user_id: str,
              params: RecommendParams | None = None) -> list[Recommendation]:
    """Similarity phase by default; network phase once the region is stable."""
    params = params or RecommendParams()
    if user_id not in graph.users:
        raise UnknownUserError(user_id)
    if is_stable(graph, params):
        return network_candidates(graph, user_id, params)
    return similarity_candidates(graph, user_id, params)
