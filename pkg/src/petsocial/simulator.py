"""Agent-based harness for the desk-scale platform experiments.

Two cohorts of equal size are built as twins: agent i in the treatment group
shares traits, home location, and every background random draw with agent i in
the control group.  Both groups socialize organically; only the treatment
group additionally receives friend recommendations and platform-issued offline
tasks.  With the mechanism disabled the two group trajectories are therefore
bit-identical, and any gap under the default config is attributable to the
mechanism alone.

Randomness is split into named substreams keyed by (seed, channel, week,
index) so that raising tasks-per-week only extends the task stream and leaves
every other draw untouched (common random numbers across A/B runs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .emotion import (
    EMOTIONS,
    Emotion,
    EmotionEngine,
    EngineConfig,
    PersonalityVector,
    StimulusTrace,
    TransitionStats,
    default_transition_stats,
)
from .errors import EmptyTrialError
from .graph import SocialGraph, UserProfile
from .perception import ConfusionMatrix, default_confusion_matrix, noisy_recognize
from .recommend import RecommendParams, recommend
from .rewards import RewardConfig, RewardLedger, RewardParams, edge_weight

BANDS = ("low", "moderate", "moderately-high", "high")
SATISFACTION_LEVELS = ("very dissatisfied", "dissatisfied", "okay",
                       "satisfied", "very satisfied")

# substream channel tags
_TRAITS, _ORGANIC, _OPARTNER, _TASK, _TACCEPT, _BEFRIEND, _EVENT, _SURPRISE = range(1, 9)
_TRIAL_USER, _TRIAL_NOISE = 20, 21

_HOME_LAT, _HOME_LON = 43.88, 125.35
_KM_PER_DEG_LAT = 111.19


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, *key)))


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@dataclass(frozen=True)
class AgentTraits:
    sociability: float      # base propensity to socialize, [0,1]
    responsiveness: float   # inclination to accept issued tasks, [0,1]

    def __post_init__(self):
        if not 0.0 <= self.sociability <= 1.0 or not 0.0 <= self.responsiveness <= 1.0:
            raise ValueError("traits must lie in [0,1]")


@dataclass
class Agent:
    user_id: str
    traits: AgentTraits
    weekly_social_time: float = 0.0


@dataclass(frozen=True)
class LonelinessBands:
    """Proxy mapping: more weekly social time and a bigger circle => less
    lonely.  Scores at a threshold go to the less lonely band."""

    time_ref: float = 6.0
    circle_ref: float = 8.0
    cuts: tuple[float, float, float] = (0.75, 0.5, 0.25)


@dataclass(frozen=True)
class SimConfig:
    population: int = 400
    split: tuple[int, int] = (200, 200)
    weeks: int = 12
    tasks_per_week: int = 8
    seed: int = 42
    reward: RewardParams = field(default_factory=RewardParams)
    recommend: RecommendParams = field(default_factory=RecommendParams)
    mechanism_enabled: bool = True
    task_hours: float = 2.0
    meet_hours: float = 1.0
    base_hours: float = 1.5
    organic_rate: float = 0.25
    organic_hours: float = 1.0
    befriend_rate: float = 0.5
    event_rate: float = 0.3
    event_hours: float = 1.5
    accept_scale: float = 4.0
    area_km: float = 30.0
    attribute_dim: int = 4
    preference_dim: int = 6
    loneliness: LonelinessBands = field(default_factory=LonelinessBands)

    def __post_init__(self):
        if sum(self.split) != self.population:
            raise ValueError(f"split {self.split} does not sum to population {self.population}")
        if self.weeks < 0 or self.tasks_per_week < 0:
            raise ValueError("weeks and tasks_per_week must be >= 0")


@dataclass
class SimMetrics:
    weeks: int
    treatment_time: list[float]
    control_time: list[float]
    treatment_circle: list[float]
    control_circle: list[float]
    loneliness: dict[str, dict[str, int]]

    def to_records(self) -> list[dict]:
        rows = [{"week": w + 1,
                 "treatment_time": self.treatment_time[w],
                 "control_time": self.control_time[w],
                 "treatment_circle": self.treatment_circle[w],
                 "control_circle": self.control_circle[w]}
                for w in range(self.weeks)]
        rows.append({"loneliness": self.loneliness})
        return rows


def loneliness_proxy(weekly_social_time: float, circle_size: int,
                     bands: LonelinessBands | None = None) -> str:
    bands = bands or LonelinessBands()
    score = 0.5 * min(weekly_social_time / bands.time_ref, 1.0) \
        + 0.5 * min(circle_size / bands.circle_ref, 1.0)
    for cut, band in zip(bands.cuts, BANDS):
        if score >= cut:
            return band
    return BANDS[-1]


def _build_cohort(config: SimConfig, prefix: str, size: int) -> tuple[SocialGraph, list[Agent]]:
    graph = SocialGraph(config.reward, config.attribute_dim, config.preference_dim)
    agents = []
    half = config.area_km / 2.0
    for i in range(size):
        r = _rng(config.seed, _TRAITS, i)
        dx, dy = r.uniform(-half, half, 2)
        lat = _HOME_LAT + dy / _KM_PER_DEG_LAT
        lon = _HOME_LON + dx / (_KM_PER_DEG_LAT * math.cos(math.radians(_HOME_LAT)))
        attrs = tuple(r.uniform(0, 1, config.attribute_dim))
        prefs = tuple(r.uniform(0, 1, config.preference_dim))
        traits = AgentTraits(float(r.uniform(0.1, 0.9)), float(r.uniform(0.2, 0.95)))
        uid = f"{prefix}{i:04d}"
        graph.add_user(UserProfile(uid, lat, lon, attrs, prefs))
        agents.append(Agent(uid, traits))
    return graph, agents


def _meet(graph: SocialGraph, u: str, v: str) -> None:
    """Self-initiated offline meeting: an immediately completed task."""
    task = graph.issue_task(u, v)
    graph.complete_task(task.task_id)


def _marginal_reward(graph: SocialGraph, u: str, v: str, params: RewardParams) -> float:
    edge = graph.edge(u, v)
    m = edge.m if edge else 0
    return params.alpha * (edge_weight(m + 1, params) - edge_weight(m, params))


def run(config: SimConfig) -> SimMetrics:
    """Run the weekly A/B experiment and collect the outcome series."""
    n_t, n_c = config.split
    t_graph, t_agents = _build_cohort(config, "t", n_t)
    c_graph, c_agents = _build_cohort(config, "c", n_c)
    ledger = RewardLedger(RewardConfig(params=config.reward))
    ledger.attach(t_graph)

    metrics = SimMetrics(config.weeks, [], [], [], [], {})
    for week in range(1, config.weeks + 1):
        t_graph.advance_clock(1.0)
        c_graph.advance_clock(1.0)
        t_hours = [config.base_hours * a.traits.sociability for a in t_agents]
        c_hours = [config.base_hours * a.traits.sociability for a in c_agents]

        # organic channel: identical draws for both cohorts (twin design)
        for i in range(max(n_t, n_c)):
            trigger = _rng(config.seed, _ORGANIC, week, i).random()
            j = int(_rng(config.seed, _OPARTNER, week, i).integers(0, max(n_t, n_c) - 1))
            if j >= i:
                j += 1
            for graph, agents, hours, size in ((t_graph, t_agents, t_hours, n_t),
                                               (c_graph, c_agents, c_hours, n_c)):
                if i >= size or j >= size:
                    continue
                if trigger < agents[i].traits.sociability * config.organic_rate:
                    _meet(graph, agents[i].user_id, agents[j].user_id)
                    hours[i] += config.organic_hours
                    hours[j] += config.organic_hours

        if config.mechanism_enabled:
            # platform tasks: partner is the current top recommendation,
            # falling back to a stream-drawn peer
            for s in range(config.tasks_per_week):
                r = _rng(config.seed, _TASK, week, s)
                a = int(r.integers(0, n_t))
                recs = recommend(t_graph, t_agents[a].user_id, config.recommend)
                if recs:
                    b_id = recs[0].candidate
                    b = int(b_id[1:])
                else:
                    b = int(r.integers(0, n_t - 1))
                    if b >= a:
                        b += 1
                    b_id = t_agents[b].user_id
                gain = _marginal_reward(t_graph, t_agents[a].user_id, b_id, config.reward)
                p_mean = (t_agents[a].traits.responsiveness + t_agents[b].traits.responsiveness) / 2.0
                accept = _rng(config.seed, _TACCEPT, week, s).random()
                if accept < p_mean * sigmoid(config.accept_scale * gain):
                    _meet(t_graph, t_agents[a].user_id, b_id)
                    t_hours[a] += config.task_hours
                    t_hours[b] += config.task_hours

            # recommendation channel: agents look up their matches and meet one
            for i in range(n_t):
                trigger = _rng(config.seed, _BEFRIEND, week, i).random()
                if trigger < t_agents[i].traits.sociability * config.befriend_rate:
                    recs = recommend(t_graph, t_agents[i].user_id, config.recommend)
                    if recs:
                        b = int(recs[0].candidate[1:])
                        _meet(t_graph, t_agents[i].user_id, recs[0].candidate)
                        t_hours[i] += config.meet_hours
                        t_hours[b] += config.meet_hours

            # platform events: collective activities plus outdoor surprise rolls
            for i in range(n_t):
                trigger = _rng(config.seed, _EVENT, week, i).random()
                if trigger < t_agents[i].traits.sociability * config.event_rate:
                    t_graph.record_collective_activity(t_agents[i].user_id)
                    t_hours[i] += config.event_hours
                    ledger.outdoor_tick(t_agents[i].user_id,
                                        _rng(config.seed, _SURPRISE, week, i),
                                        at=float(week))

        for agents, hours in ((t_agents, t_hours), (c_agents, c_hours)):
            for agent, h in zip(agents, hours):
                agent.weekly_social_time = h
        metrics.treatment_time.append(float(np.mean(t_hours)) if t_hours else 0.0)
        metrics.control_time.append(float(np.mean(c_hours)) if c_hours else 0.0)
        metrics.treatment_circle.append(
            float(np.mean([len(t_graph.neighbors(a.user_id)) for a in t_agents])) if t_agents else 0.0)
        metrics.control_circle.append(
            float(np.mean([len(c_graph.neighbors(a.user_id)) for a in c_agents])) if c_agents else 0.0)

    for group, graph, agents in (("treatment", t_graph, t_agents),
                                 ("control", c_graph, c_agents)):
        counts = dict.fromkeys(BANDS, 0)
        for agent in agents:
            band = loneliness_proxy(agent.weekly_social_time,
                                    len(graph.neighbors(agent.user_id)),
                                    config.loneliness)
            counts[band] += 1
        metrics.loneliness[group] = counts
    return metrics


# ----------------------------------------------------------------- emotion trial


@dataclass(frozen=True)
class TrialConfig:
    breeders: int = 20
    interactions: int = 40  # per breeder
    seed: int = 7
    k: int = 3
    transition_every: int = 5
    user_stimulus: float = 0.5
    satisfaction_cuts: tuple[float, float, float, float] = (0.2, 0.4, 0.6, 0.8)
    policy: str = "engine"  # engine | perfect


@dataclass
class TrialResult:
    satisfaction: dict[str, int]
    empirical_confusion: np.ndarray    # [predicted, true], column-normalized
    empathy_fractions: list[float]
    interactions: int


def run_emotion_trial(config: TrialConfig,
                      confusion: ConfusionMatrix | None = None,
                      stats: TransitionStats | None = None) -> TrialResult:
    """Breeder agents show emotions; the pet recognizes them through the
    confusion noise channel and reacts.  A reaction is empathetic when the
    realized transition's polarity matches the recognized emotion's polarity;
    each breeder's satisfaction level is their empathetic fraction bucketed
    into five bands."""
    if config.breeders < 1 or config.interactions < 1:
        raise EmptyTrialError("the trial needs at least one breeder and one interaction")
    if config.policy not in ("engine", "perfect"):
        raise ValueError(f"unknown policy {config.policy!r}")
    confusion = confusion or default_confusion_matrix()
    stats = stats or default_transition_stats()

    counts = np.zeros((len(EMOTIONS), len(EMOTIONS)))
    fractions = []
    hist = dict.fromkeys(SATISFACTION_LEVELS, 0)
    for b in range(config.breeders):
        user_rng = _rng(config.seed, _TRIAL_USER, b)
        noise_rng = _rng(config.seed, _TRIAL_NOISE, b)
        engine = None
        if config.policy == "engine":
            engine = EmotionEngine(
                stats=stats, personality=PersonalityVector.uniform(),
                config=EngineConfig(k=config.k, transition_every=config.transition_every,
                                    seed=config.seed * 1000 + b))
        empathetic = 0
        for _ in range(config.interactions):
            true = EMOTIONS[int(user_rng.integers(0, len(EMOTIONS)))]
            recognized = noisy_recognize(true, confusion, noise_rng)
            counts[recognized.index, true.index] += 1
            if config.policy == "perfect":
                empathetic += 1
                continue
            channel = "S3" if recognized.positive else "S4"
            engine.stimulate(channel, config.user_stimulus)
            for _ in range(config.transition_every):
                engine.tick()
            if engine.state.current.positive == recognized.positive:
                empathetic += 1
        frac = empathetic / config.interactions
        fractions.append(frac)
        level = sum(frac >= cut for cut in config.satisfaction_cuts)
        hist[SATISFACTION_LEVELS[level]] += 1

    col_sums = counts.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        empirical = np.where(col_sums > 0, counts / col_sums, 0.0)
    return TrialResult(hist, empirical, fractions,
                       config.breeders * config.interactions)
