"""Social graph store: users, stores, weighted friendship edges, and offline tasks.

The graph is simple and undirected.  Edge weights are a logistic function of the
number of offline tasks the two endpoints finished together; the weight is
cached on the edge and kept coherent with the active reward parameters.

Persistence is a line-delimited UTF-8 text format.  Each line is one record,
tagged with its kind followed by ``key=value`` fields in a fixed order:

    user id=<id> lat=<deg> lon=<deg> w=<int> attrs=<f,f,...> prefs=<f,f,...>
    edge u=<id> v=<id> m=<int> created=<time>
    store id=<id> lat=<deg> lon=<deg> events=<eid:cap:start:end;...> venues=<name;...>
    task id=<id> u=<id> v=<id> status=<issued|completed|expired> issued=<time> completed=<time|-> expires=<time|->

Unknown tags are rejected with the offending line number.  Edge weights are not
serialized; they are derived from ``m`` on load.
"""

from __future__ import annotations

import math
import threading
import copy
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional

from .errors import (
    AlreadyCompletedError,
    DuplicateEdgeError,
    DuplicateUserError,
    ExpiredTaskError,
    GraphFormatError,
    SelfEdgeError,
    UnknownTaskError,
    UnknownUserError,
)
from .rewards import RewardParams, edge_weight

EARTH_RADIUS_KM = 6371.0088

_ID_FORBIDDEN = set(" \t\n=,;|")


def _check_id(value: str, what: str) -> str:
    if not value or any(c in _ID_FORBIDDEN for c in value):
        raise ValueError(f"invalid {what} id: {value!r}")
    return value


def _check_unit_vector(values, what: str) -> tuple[float, ...]:
    out = tuple(float(x) for x in values)
    for x in out:
        if not (0.0 <= x <= 1.0) or not math.isfinite(x):
            raise ValueError(f"{what} entries must lie in [0,1], got {x}")
    return out


@dataclass(frozen=True)
class UserProfile:
    """A platform user: location, feature vectors, and collective-activity count."""

    user_id: str
    latitude: float
    longitude: float
    attributes: tuple[float, ...] = ()
    preferences: tuple[float, ...] = ()
    collective_activities: int = 0

    def __post_init__(self):
        _check_id(self.user_id, "user")
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude out of range: {self.latitude}")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude out of range: {self.longitude}")
        object.__setattr__(self, "attributes", _check_unit_vector(self.attributes, "attributes"))
        object.__setattr__(self, "preferences", _check_unit_vector(self.preferences, "preferences"))
        if self.collective_activities < 0:
            raise ValueError("collective_activities must be >= 0")


@dataclass
class SocialEdge:
    """Undirected friendship edge; ``m`` counts finished offline tasks."""

    u: str
    v: str
    m: int = 0
    weight: float = 0.0  # cached edge_weight(m) under the graph's reward params
    created_at: float = 0.0

    @property
    def pair(self) -> tuple[str, str]:
        return _edge_key(self.u, self.v)


@dataclass(frozen=True)
class EventListing:
    event_id: str
    capacity: int
    start: float
    end: float

    def __post_init__(self):
        _check_id(self.event_id, "event")
        if self.capacity <= 0:
            raise ValueError("event capacity must be positive")
        if self.end < self.start:
            raise ValueError("event window end precedes start")


@dataclass(frozen=True)
class Store:
    store_id: str
    latitude: float
    longitude: float
    event_listings: tuple[EventListing, ...] = ()
    venue_listings: tuple[str, ...] = ()

    def __post_init__(self):
        _check_id(self.store_id, "store")


@dataclass
class OfflineTask:
    task_id: str
    u: str
    v: str
    status: str = "issued"  # issued | completed | expired
    issued_at: float = 0.0
    completed_at: Optional[float] = None
    expires_at: Optional[float] = None


@dataclass(frozen=True)
class TaskCompletion:
    """Event handed to completion listeners (the rewards ledger subscribes)."""

    task_id: str
    u: str
    v: str
    edge_m: int
    at: float


def _edge_key(u: str, v: str) -> tuple[str, str]:
    return (u, v) if u <= v else (v, u)


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance between two coordinates, in km."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(a)))


class SocialGraph:
    """Mutable social graph with a single-writer contract.

    All mutating methods take the internal lock; ``snapshot()`` returns a deep
    copy that is safe to read from any thread without locking.
    """

    def __init__(self, reward_params: RewardParams | None = None,
                 attribute_dim: int | None = None, preference_dim: int | None = None):
        self._lock = threading.RLock()
        self.reward_params = reward_params or RewardParams()
        self.attribute_dim = attribute_dim
        self.preference_dim = preference_dim
        self.users: dict[str, UserProfile] = {}
        self.edges: dict[tuple[str, str], SocialEdge] = {}
        self.stores: dict[str, Store] = {}
        self.tasks: dict[str, OfflineTask] = {}
        self.clock: float = 0.0
        self._adjacency: dict[str, set[str]] = {}
        self._edge_creation_times: list[float] = []
        self._task_counter = 0
        self._completion_listeners: list[Callable[[TaskCompletion], None]] = []

    # ------------------------------------------------------------------ users

    def add_user(self, profile: UserProfile) -> str:
        with self._lock:
            if profile.user_id in self.users:
                raise DuplicateUserError(f"user already exists: {profile.user_id!r}")
            if self.attribute_dim is None:
                self.attribute_dim = len(profile.attributes)
            if self.preference_dim is None:
                self.preference_dim = len(profile.preferences)
            if len(profile.attributes) != self.attribute_dim:
                raise ValueError(
                    f"attribute vector length {len(profile.attributes)} != catalog dim {self.attribute_dim}")
            if len(profile.preferences) != self.preference_dim:
                raise ValueError(
                    f"preference vector length {len(profile.preferences)} != catalog dim {self.preference_dim}")
            self.users[profile.user_id] = profile
            self._adjacency[profile.user_id] = set()
            return profile.user_id

    def user(self, user_id: str) -> UserProfile:
        try:
            return self.users[user_id]
        except KeyError:
            raise UnknownUserError(user_id) from None

    def record_collective_activity(self, user_id: str, count: int = 1) -> UserProfile:
        with self._lock:
            profile = self.user(user_id)
            updated = replace(profile, collective_activities=profile.collective_activities + count)
            self.users[user_id] = updated
            return updated

    # ------------------------------------------------------------------ edges

    def add_edge(self, u: str, v: str, created_at: float | None = None) -> SocialEdge:
        with self._lock:
            if u == v:
                raise SelfEdgeError(u)
            self.user(u), self.user(v)
            key = _edge_key(u, v)
            if key in self.edges:
                raise DuplicateEdgeError(f"edge already exists: {key}")
            at = self.clock if created_at is None else created_at
            edge = SocialEdge(*key, m=0, weight=edge_weight(0, self.reward_params), created_at=at)
            self.edges[key] = edge
            self._adjacency[u].add(v)
            self._adjacency[v].add(u)
            self._edge_creation_times.append(at)
            return edge

    def edge(self, u: str, v: str) -> SocialEdge | None:
        return self.edges.get(_edge_key(u, v))

    def neighbors(self, u: str) -> frozenset[str]:
        if u not in self.users:
            raise UnknownUserError(u)
        return frozenset(self._adjacency[u])

    def degree(self, u: str) -> int:
        return len(self.neighbors(u))

    def set_reward_params(self, params: RewardParams) -> None:
        """Swap reward parameters and recompute every cached edge weight."""
        with self._lock:
            self.reward_params = params
            for edge in self.edges.values():
                edge.weight = edge_weight(edge.m, params)

    def new_edge_count_since(self, since: float) -> int:
        return sum(1 for t in self._edge_creation_times if t > since)

    # ------------------------------------------------------------------ stores

    def add_store(self, store: Store) -> str:
        with self._lock:
            self.stores[store.store_id] = store
            return store.store_id

    # ------------------------------------------------------------------ tasks

    def issue_task(self, u: str, v: str, ttl: float | None = None,
                   task_id: str | None = None) -> OfflineTask:
        with self._lock:
            if u == v:
                raise SelfEdgeError(u)
            self.user(u), self.user(v)
            if task_id is None:
                self._task_counter += 1
                task_id = f"task-{self._task_counter:06d}"
            _check_id(task_id, "task")
            if task_id in self.tasks:
                raise ValueError(f"task id already exists: {task_id!r}")
            expires = None if ttl is None else self.clock + ttl
            task = OfflineTask(task_id, u, v, status="issued",
                               issued_at=self.clock, expires_at=expires)
            self.tasks[task_id] = task
            return task

    def complete_task(self, task_id: str) -> SocialEdge:
        """Mark a task done: bump ``m`` on the pair's edge (creating it at m=1),
        refresh the weight cache, and notify completion listeners."""
        with self._lock:
            task = self.tasks.get(task_id)
            if task is None:
                raise UnknownTaskError(task_id)
            if task.status == "completed":
                raise AlreadyCompletedError(task_id)
            if task.status == "expired" or (
                    task.expires_at is not None and self.clock > task.expires_at):
                task.status = "expired"
                raise ExpiredTaskError(task_id)
            key = _edge_key(task.u, task.v)
            edge = self.edges.get(key)
            if edge is None:
                edge = self.add_edge(task.u, task.v)
            edge.m += 1
            edge.weight = edge_weight(edge.m, self.reward_params)
            task.status = "completed"
            task.completed_at = self.clock
            event = TaskCompletion(task.task_id, task.u, task.v, edge.m, self.clock)
        for listener in list(self._completion_listeners):
            listener(event)
        return edge

    def on_task_completed(self, listener: Callable[[TaskCompletion], None]) -> None:
        self._completion_listeners.append(listener)

    # ------------------------------------------------------------------ queries

    def distance_km(self, u: str, v: str) -> float:
        a, b = self.user(u), self.user(v)
        return haversine_km(a.latitude, a.longitude, b.latitude, b.longitude)

    def advance_clock(self, dt: float) -> float:
        with self._lock:
            if dt < 0:
                raise ValueError("clock cannot run backwards")
            self.clock += dt
            return self.clock

    def snapshot(self) -> "SocialGraph":
        """Deep, immutable-by-convention copy for lock-free readers."""
        with self._lock:
            clone = SocialGraph(self.reward_params, self.attribute_dim, self.preference_dim)
            clone.users = dict(self.users)
            clone.edges = {k: copy.copy(e) for k, e in self.edges.items()}
            clone.stores = dict(self.stores)
            clone.tasks = {k: copy.copy(t) for k, t in self.tasks.items()}
            clone.clock = self.clock
            clone._adjacency = {k: set(s) for k, s in self._adjacency.items()}
            clone._edge_creation_times = list(self._edge_creation_times)
            clone._task_counter = self._task_counter
            return clone

    # ------------------------------------------------------------------ persistence

    def to_lines(self) -> list[str]:
        lines = []
        for uid in sorted(self.users):
            p = self.users[uid]
            lines.append(
                f"user id={p.user_id} lat={p.latitude!r} lon={p.longitude!r} "
                f"w={p.collective_activities} "
                f"attrs={','.join(repr(x) for x in p.attributes)} "
                f"prefs={','.join(repr(x) for x in p.preferences)}")
        for key in sorted(self.edges):
            e = self.edges[key]
            lines.append(f"edge u={e.u} v={e.v} m={e.m} created={e.created_at!r}")
        for sid in sorted(self.stores):
            s = self.stores[sid]
            events = ";".join(f"{ev.event_id}:{ev.capacity}:{ev.start!r}:{ev.end!r}"
                              for ev in s.event_listings)
            venues = ";".join(s.venue_listings)
            lines.append(f"store id={s.store_id} lat={s.latitude!r} lon={s.longitude!r} "
                         f"events={events} venues={venues}")
        for tid in sorted(self.tasks):
            t = self.tasks[tid]
            completed = "-" if t.completed_at is None else repr(t.completed_at)
            expires = "-" if t.expires_at is None else repr(t.expires_at)
            lines.append(f"task id={t.task_id} u={t.u} v={t.v} status={t.status} "
                         f"issued={t.issued_at!r} completed={completed} expires={expires}")
        return lines

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for line in self.to_lines():
                fh.write(line + "\n")

    @classmethod
    def from_lines(cls, lines: Iterable[str],
                   reward_params: RewardParams | None = None) -> "SocialGraph":
        graph = cls(reward_params)
        max_time = 0.0
        for line_no, raw in enumerate(lines, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tag, _, rest = line.partition(" ")
            try:
                fields = dict(item.split("=", 1) for item in rest.split(" ") if item)
            except ValueError:
                raise GraphFormatError(line_no, f"malformed fields in {line!r}") from None
            try:
                if tag == "user":
                    attrs = tuple(float(x) for x in fields["attrs"].split(",") if x)
                    prefs = tuple(float(x) for x in fields["prefs"].split(",") if x)
                    graph.add_user(UserProfile(
                        fields["id"], float(fields["lat"]), float(fields["lon"]),
                        attrs, prefs, int(fields["w"])))
                elif tag == "edge":
                    created = float(fields["created"])
                    edge = graph.add_edge(fields["u"], fields["v"], created_at=created)
                    edge.m = int(fields["m"])
                    if edge.m < 0:
                        raise ValueError("edge m must be >= 0")
                    edge.weight = edge_weight(edge.m, graph.reward_params)
                    max_time = max(max_time, created)
                elif tag == "store":
                    events = []
                    for item in fields["events"].split(";"):
                        if not item:
                            continue
                        eid, cap, start, end = item.split(":")
                        events.append(EventListing(eid, int(cap), float(start), float(end)))
                    venues = tuple(v for v in fields["venues"].split(";") if v)
                    graph.add_store(Store(fields["id"], float(fields["lat"]),
                                          float(fields["lon"]), tuple(events), venues))
                elif tag == "task":
                    completed = None if fields["completed"] == "-" else float(fields["completed"])
                    expires = None if fields["expires"] == "-" else float(fields["expires"])
                    task = OfflineTask(fields["id"], fields["u"], fields["v"],
                                       status=fields["status"], issued_at=float(fields["issued"]),
                                       completed_at=completed, expires_at=expires)
                    if task.status not in ("issued", "completed", "expired"):
                        raise ValueError(f"unknown task status {task.status!r}")
                    if task.status == "completed" and (task.completed_at or 0.0) < task.issued_at:
                        raise ValueError("completed_at precedes issued_at")
                    graph.user(task.u), graph.user(task.v)
                    graph.tasks[task.task_id] = task
                    max_time = max(max_time, task.issued_at, task.completed_at or 0.0)
                else:
                    raise GraphFormatError(line_no, f"unknown record tag {tag!r}")
            except GraphFormatError:
                raise
            except (KeyError, ValueError) as exc:
                raise GraphFormatError(line_no, str(exc)) from exc
        graph.clock = max_time
        return graph

    @classmethod
    def load(cls, path, reward_params: RewardParams | None = None) -> "SocialGraph":
        with open(path, encoding="utf-8") as fh:
            return cls.from_lines(fh, reward_params)

    def equals(self, other: "SocialGraph") -> bool:
        """Field-by-field equality of users, edges, stores, and tasks."""
        return (self.users == other.users
                and {k: (e.u, e.v, e.m, e.created_at) for k, e in self.edges.items()}
                == {k: (e.u, e.v, e.m, e.created_at) for k, e in other.edges.items()}
                and self.stores == other.stores
                and {k: (t.task_id, t.u, t.v, t.status, t.issued_at, t.completed_at, t.expires_at)
                     for k, t in self.tasks.items()}
                == {k: (t.task_id, t.u, t.v, t.status, t.issued_at, t.completed_at, t.expires_at)
                    for k, t in other.tasks.items()})
