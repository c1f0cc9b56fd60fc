"""Probabilistic pet emotion engine.

Seven emotions, split into a positive class (happy, surprise, neutral) and a
negative class (sad, anger, disgust, fear).  Four stimulus channels drive
transitions: environment-positive S1, environment-negative S2, breeder-positive
S3, breeder-negative S4.  Each stimulus rises like a damped second-order step
response, peaks, then decays exponentially with its channel time constant.

The raw intensity of a move from emotion i to j is

    M_ij = w_ij * (a1 * (S1 + S3) + a2 * (S2 + S4)) + W_j

with (a1, a2) = (+1, -1) when j is positive-class and (-1, +1) otherwise;
``w_ij`` comes from a survey-derived transition-statistics matrix and ``W_j``
is the pet's personality bias toward j.  Intensities are floored at a small
epsilon and normalized into a probability row.  On each realized transition the
personality component of the chosen target compounds by (1 + beta), so the
pet's character slowly settles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatchError, MatrixFormatError, NegativeEntryError


class Emotion(Enum):
    ANGER = "anger"
    DISGUST = "disgust"
    FEAR = "fear"
    HAPPY = "happy"
    SAD = "sad"
    SURPRISE = "surprise"
    NEUTRAL = "neutral"

    @property
    def index(self) -> int:
        return EMOTIONS.index(self)

    @property
    def positive(self) -> bool:
        return self in POSITIVE_CLASS


EMOTIONS: tuple[Emotion, ...] = tuple(Emotion)
POSITIVE_CLASS = frozenset({Emotion.HAPPY, Emotion.SURPRISE, Emotion.NEUTRAL})
NEGATIVE_CLASS = frozenset(set(EMOTIONS) - POSITIVE_CLASS)

# survey labels sometimes use these spellings
LABEL_ALIASES = {"angry": "anger", "calmness": "neutral", "calm": "neutral"}

CLAMP_EPS = 1e-6


def emotion_from_label(label: str) -> Emotion:
    name = label.strip().lower()
    name = LABEL_ALIASES.get(name, name)
    try:
        return Emotion(name)
    except ValueError:
        raise MatrixFormatError(f"unknown emotion label: {label!r}") from None


# --------------------------------------------------------------------- matrices


def read_labeled_matrix(path) -> tuple[np.ndarray, list[Emotion], list[Emotion]]:
    """Parse a comma-separated matrix whose header row and first column name
    emotions.  Returns (values, row labels, column labels)."""
    with open(path, encoding="utf-8") as fh:
        rows = [line.strip() for line in fh if line.strip()]
    if not rows:
        raise MatrixFormatError("empty matrix file")
    header = rows[0].split(",")
    col_labels = [emotion_from_label(c) for c in header[1:] if c.strip()]
    row_labels = []
    values = []
    for raw in rows[1:]:
        cells = raw.split(",")
        row_labels.append(emotion_from_label(cells[0]))
        try:
            values.append([float(c) for c in cells[1:]])
        except ValueError as exc:
            raise MatrixFormatError(f"non-numeric entry in row {cells[0]!r}") from exc
    matrix = np.array(values, dtype=float)
    if matrix.ndim != 2 or matrix.shape != (len(EMOTIONS), len(EMOTIONS)):
        raise DimensionMismatchError(
            f"expected a {len(EMOTIONS)}x{len(EMOTIONS)} matrix, got {matrix.shape}")
    if len(col_labels) != len(EMOTIONS) or len(set(col_labels)) != len(EMOTIONS):
        raise MatrixFormatError("header must name all seven emotions once")
    if len(set(row_labels)) != len(EMOTIONS):
        raise MatrixFormatError("rows must name all seven emotions once")
    return matrix, row_labels, col_labels


def _reorder(matrix: np.ndarray, row_labels, col_labels) -> np.ndarray:
    """Rearrange rows/columns into canonical enum order."""
    out = np.empty_like(matrix)
    for i, re_ in enumerate(row_labels):
        for j, ce in enumerate(col_labels):
            out[re_.index, ce.index] = matrix[i, j]
    return out


@dataclass(frozen=True)
class TransitionStats:
    """Survey-derived switching likelihoods; rows = from, columns = to."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (len(EMOTIONS), len(EMOTIONS)):
            raise DimensionMismatchError(f"need a 7x7 matrix, got {m.shape}")
        if np.any(m < 0):
            raise NegativeEntryError("transition statistics must be non-negative")
        if np.any(m.sum(axis=1) <= 0):
            raise MatrixFormatError("every row needs at least one positive entry")
        object.__setattr__(self, "matrix", m)

    def of(self, i: Emotion, j: Emotion) -> float:
        return float(self.matrix[i.index, j.index])


def load_transition_stats(path) -> TransitionStats:
    matrix, rows, cols = read_labeled_matrix(path)
    return TransitionStats(_reorder(matrix, rows, cols))


def default_transition_stats() -> TransitionStats:
    from importlib.resources import files
    return load_transition_stats(files("petsocial.data") / "transition_stats.csv")


# --------------------------------------------------------------------- stimuli

CHANNELS = ("S1", "S2", "S3", "S4")
POSITIVE_CHANNELS = ("S1", "S3")


@dataclass(frozen=True)
class StimulusTrace:
    """One stimulus event: a damped second-order rise to a peak, then an
    exponential decay with time constant ``tc``.

    The rise is the unit-step response of
        y'' + 2*xi*wn*y' + wn^2*y = wn^2*u
    from rest.  The peak is the first overshoot for underdamped traces and the
    configured ``rise_duration`` (default tc) otherwise, where the response has
    essentially settled.
    """

    channel: str
    magnitude: float  # step input u
    onset: float
    tc: float
    xi: float = 1.0
    wn: Optional[float] = None
    rise_duration: Optional[float] = None

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise ValueError(f"unknown stimulus channel: {self.channel!r}")
        if self.magnitude < 0:
            raise ValueError("stimulus magnitude must be >= 0")
        if self.tc <= 0:
            raise ValueError("decay time constant must be positive")
        if self.xi <= 0:
            raise ValueError("damping ratio must be positive")
        if self.wn is None:
            object.__setattr__(self, "wn", 4.0 / self.tc)
        elif self.wn <= 0:
            raise ValueError("natural frequency must be positive")
        if self.rise_duration is None:
            if self.xi < 1.0:
                first_peak = math.pi / (self.wn * math.sqrt(1.0 - self.xi ** 2))
                object.__setattr__(self, "rise_duration", first_peak)
            else:
                object.__setattr__(self, "rise_duration", self.tc)
        elif self.rise_duration <= 0:
            raise ValueError("rise duration must be positive")

    @property
    def peak_time(self) -> float:
        return self.onset + self.rise_duration

    @property
    def y_peak(self) -> float:
        return self._rise(self.rise_duration)

    def _rise(self, dt: float) -> float:
        """Closed-form step response at ``dt`` seconds after onset."""
        u, xi, wn = self.magnitude, self.xi, self.wn
        if xi == 1.0:
            return u * (1.0 - (1.0 + wn * dt) * math.exp(-wn * dt))
        if xi < 1.0:
            wd = wn * math.sqrt(1.0 - xi ** 2)
            damp = math.exp(-xi * wn * dt)
            return u * (1.0 - damp * (math.cos(wd * dt) + xi / math.sqrt(1.0 - xi ** 2) * math.sin(wd * dt)))
        root = wn * math.sqrt(xi ** 2 - 1.0)
        r1, r2 = -xi * wn + root, -xi * wn - root
        return u * (1.0 - (r2 * math.exp(r1 * dt) - r1 * math.exp(r2 * dt)) / (r2 - r1))

    def value(self, t: float) -> float:
        if t < self.onset:
            raise ValueError(f"t={t} precedes stimulus onset {self.onset}")
        dt = t - self.onset
        if dt <= self.rise_duration:
            return max(0.0, self._rise(dt))
        return self.y_peak * math.exp(-(dt - self.rise_duration) / self.tc)

    def exhausted(self, t: float) -> bool:
        return t > self.peak_time and self.value(t) < 1e-9 * max(self.magnitude, 1.0)


# --------------------------------------------------------------------- inputs


@dataclass(frozen=True)
class SensorFrame:
    """Normalized sensor readings with their aggregation weights."""

    readings: tuple[float, ...]
    weights: tuple[float, ...]
    comfort_threshold: float = 0.5

    def __post_init__(self):
        readings = tuple(float(r) for r in self.readings)
        weights = tuple(float(w) for w in self.weights)
        if len(readings) != len(weights) or not readings:
            raise DimensionMismatchError("readings and weights must align and be non-empty")
        if any(not 0.0 <= r <= 1.0 for r in readings):
            raise ValueError("sensor readings must lie in [0,1]")
        if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-9:
            raise ValueError("weights must be non-negative and sum to 1")
        if not 0.0 <= self.comfort_threshold <= 1.0:
            raise ValueError("comfort threshold must lie in [0,1]")
        object.__setattr__(self, "readings", readings)
        object.__setattr__(self, "weights", weights)


@dataclass(frozen=True)
class PropItem:
    prop_id: str
    liked: bool
    magnitude: float

    def __post_init__(self):
        if self.magnitude <= 0:
            raise ValueError("prop magnitude must be positive")


def comfort(frame: SensorFrame) -> float:
    """Weighted aggregate of the sensor readings, in [0, 1]."""
    return float(sum(w * r for w, r in zip(frame.weights, frame.readings)))


def env_stimuli(E: float, C: float) -> tuple[float, float]:
    """Split comfort against the threshold into (S1, S2); both zero at E == C."""
    if E > C:
        return (E - C, 0.0)
    if E < C:
        return (0.0, C - E)
    return (0.0, 0.0)


def breeder_stimuli(prop: PropItem) -> tuple[float, float]:
    """(S3, S4) pulse for a fed prop: liked drives S3, disliked drives S4."""
    return (prop.magnitude, 0.0) if prop.liked else (0.0, prop.magnitude)


# --------------------------------------------------------------------- personality


@dataclass(frozen=True)
class PersonalityVector:
    values: tuple[float, ...]
    beta: float = 0.05
    w_max: Optional[float] = None

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) != len(EMOTIONS):
            raise DimensionMismatchError("personality needs one value per emotion")
        if any(v <= 0 for v in vals):
            raise ValueError("personality values must be positive")
        if self.beta <= 0:
            raise ValueError("growth coefficient beta must be positive")
        if self.w_max is not None and any(v > self.w_max for v in vals):
            raise ValueError("personality values exceed the configured cap")
        object.__setattr__(self, "values", vals)

    def of(self, j: Emotion) -> float:
        return self.values[j.index]

    @classmethod
    def uniform(cls, value: float = 1.0, beta: float = 0.05,
                w_max: Optional[float] = None) -> "PersonalityVector":
        return cls((value,) * len(EMOTIONS), beta, w_max)


def personality_update(personality: PersonalityVector, j: Emotion) -> PersonalityVector:
    """Compound the chosen target's bias by (1 + beta), honoring the cap."""
    grown = personality.values[j.index] * (1.0 + personality.beta)
    if personality.w_max is not None:
        grown = min(grown, personality.w_max)
    vals = list(personality.values)
    vals[j.index] = grown
    return replace(personality, values=tuple(vals))


# --------------------------------------------------------------------- transitions


def transition_intensity(i: Emotion, j: Emotion, stimuli: Sequence[float],
                         stats: TransitionStats, personality: PersonalityVector) -> float:
    """Raw intensity of the move i -> j under the four stimulus channels."""
    s1, s2, s3, s4 = stimuli
    if min(s1, s2, s3, s4) < 0:
        raise ValueError("stimuli must be non-negative")
    a1 = 1.0 if j.positive else -1.0
    return stats.of(i, j) * (a1 * (s1 + s3) - a1 * (s2 + s4)) + personality.of(j)


def transition_probabilities(current: Emotion, stimuli: Sequence[float],
                             stats: TransitionStats,
                             personality: PersonalityVector) -> np.ndarray:
    """Normalized transition row from ``current``; intensities are floored at
    a small epsilon first, so negative raw values cannot break normalization."""
    m = np.array([transition_intensity(current, j, stimuli, stats, personality)
                  for j in EMOTIONS])
    m = np.maximum(m, CLAMP_EPS)
    return m / m.sum()


def top_k_distribution(p: np.ndarray, k: int) -> np.ndarray:
    """Zero out all but the k most likely targets (ties broken by emotion
    order) and renormalize."""
    if not 1 <= k <= len(EMOTIONS):
        raise ValueError(f"k must lie in 1..{len(EMOTIONS)}, got {k}")
    order = sorted(range(len(EMOTIONS)), key=lambda idx: (-p[idx], idx))
    keep = order[:k]
    out = np.zeros_like(p)
    out[keep] = p[keep]
    return out / out.sum()


@dataclass
class EmotionState:
    """Live state of one pet's engine."""

    current: Emotion = Emotion.NEUTRAL
    personality: PersonalityVector = field(default_factory=PersonalityVector.uniform)
    stats: TransitionStats = field(default_factory=lambda: default_transition_stats())
    k: int = 3
    traces: list[StimulusTrace] = field(default_factory=list)
    last_p: Optional[np.ndarray] = None

    def stimuli_at(self, t: float) -> tuple[float, float, float, float]:
        sums = dict.fromkeys(CHANNELS, 0.0)
        for trace in self.traces:
            if t >= trace.onset:
                sums[trace.channel] += trace.value(t)
        return tuple(sums[c] for c in CHANNELS)

    def prune(self, t: float) -> None:
        self.traces = [tr for tr in self.traces if not tr.exhausted(t)]


def step(state: EmotionState, rng: np.random.Generator) -> Emotion:
    """Sample the next emotion from the top-k gated distribution, update the
    state, and let the chosen target's personality bias grow."""
    if state.last_p is None:
        raise ValueError("transition probabilities have not been computed yet")
    gated = top_k_distribution(state.last_p, state.k)
    idx = int(rng.choice(len(EMOTIONS), p=gated))
    chosen = EMOTIONS[idx]
    state.current = chosen
    state.personality = personality_update(state.personality, chosen)
    return chosen


# --------------------------------------------------------------------- engine


@dataclass(frozen=True)
class EngineConfig:
    k: int = 3
    tick_seconds: float = 1.0
    transition_every: int = 10  # ticks between realized transitions
    channel_tc: dict[str, float] = field(
        default_factory=lambda: {"S1": 20.0, "S2": 20.0, "S3": 15.0, "S4": 15.0})
    xi: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.tick_seconds <= 0 or self.transition_every < 1:
            raise ValueError("tick cadence out of range")


class EmotionEngine:
    """Clocked wrapper: advances simulated time, applies queued inputs, keeps
    the probability row fresh, and realizes a transition every few ticks."""

    def __init__(self, stats: TransitionStats | None = None,
                 personality: PersonalityVector | None = None,
                 config: EngineConfig | None = None,
                 initial: Emotion = Emotion.NEUTRAL):
        self.config = config or EngineConfig()
        self.state = EmotionState(
            current=initial,
            personality=personality or PersonalityVector.uniform(),
            stats=stats or default_transition_stats(),
            k=self.config.k)
        self.rng = np.random.default_rng(self.config.seed)
        self.tick_index = 0
        self.time = 0.0
        self.last_comfort: Optional[float] = None
        self._refresh()

    @property
    def now(self) -> float:
        return self.time

    def _refresh(self) -> None:
        stimuli = self.state.stimuli_at(self.time)
        self.state.last_p = transition_probabilities(
            self.state.current, stimuli, self.state.stats, self.state.personality)

    def stimulate(self, channel: str, magnitude: float) -> Optional[StimulusTrace]:
        """Add one stimulus pulse on a channel; zero magnitude is a no-op."""
        if magnitude <= 0.0:
            return None
        trace = StimulusTrace(channel, magnitude, onset=self.time,
                              tc=self.config.channel_tc[channel], xi=self.config.xi)
        self.state.traces.append(trace)
        self._refresh()
        return trace

    def feed(self, prop: PropItem) -> StimulusTrace:
        s3, s4 = breeder_stimuli(prop)
        return self.stimulate("S3" if prop.liked else "S4", s3 if prop.liked else s4)

    def sense_environment(self, frame: SensorFrame) -> tuple[float, float, float]:
        """Returns (comfort, S1 pulse, S2 pulse); zero pulses add no trace."""
        E = comfort(frame)
        s1, s2 = env_stimuli(E, frame.comfort_threshold)
        self.stimulate("S1", s1)
        self.stimulate("S2", s2)
        self.last_comfort = E
        self._refresh()
        return E, s1, s2

    def tick(self) -> dict:
        """Advance one tick; recompute probabilities; transition when due."""
        self.tick_index += 1
        self.time = self.tick_index * self.config.tick_seconds
        self.state.prune(self.time)
        self._refresh()
        if self.tick_index % self.config.transition_every == 0:
            step(self.state, self.rng)
            self._refresh()
        return self.snapshot()

    def snapshot(self) -> dict:
        s1, s2, s3, s4 = self.state.stimuli_at(self.time)
        return {
            "v": 1,
            "tick": self.tick_index,
            "time": self.time,
            "emotion": self.state.current.value,
            "p": [float(x) for x in self.state.last_p],
            "stimuli": {"S1": s1, "S2": s2, "S3": s3, "S4": s4},
            "personality": list(self.state.personality.values),
            "k": self.state.k,
            "comfort": self.last_comfort,
        }


def trace_record(snapshot: dict) -> str:
    """One line of the emotion trace export."""
    import json
    return json.dumps(snapshot, separators=(",", ":"))
