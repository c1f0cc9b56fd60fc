"""Service layer: HTTP API plus a per-pet live state stream.

One asyncio tick loop runs per pet regardless of how many sessions watch it.
Feed and environment commands go through the pet's ordered inbox and take
effect on the next tick; stream frames carry strictly increasing tick numbers.
Slow stream consumers lose oldest frames rather than stalling the loop.

Configuration is a JSON file (see ``AppConfig``); the ``PETSOCIAL_CONFIG``
environment variable supplies the default path and CLI flags override file
values.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import os
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from pydantic import BaseModel

from .emotion import EmotionEngine, EngineConfig, PersonalityVector, PropItem, SensorFrame
from .errors import (
    AlreadyCompletedError,
    ExpiredTaskError,
    PetSocialError,
    UnknownTaskError,
    UnknownUserError,
)
from .graph import SocialGraph
from .recommend import RecommendParams, recommend
from .rewards import RewardConfig, RewardLedger, edge_weight, reward_config_from_dict, total_reward

DEFAULT_PROPS = {
    "ration": PropItem("ration", liked=True, magnitude=0.5),
    "bone": PropItem("bone", liked=True, magnitude=0.8),
    "bitter-pill": PropItem("bitter-pill", liked=False, magnitude=0.4),
}


@dataclass
class AppConfig:
    """Service configuration.

    JSON keys: graph (path), checkpoint (path), checkpoint_every_s, reward
    (reward-config object), recommend (params object), pets (list of
    {pet_id, k, tick_seconds, transition_every, seed, personality}),
    props (list of {prop_id, liked, magnitude}).
    """

    graph_path: Optional[str] = None
    checkpoint_path: Optional[str] = None
    checkpoint_every_s: float = 0.0
    reward: RewardConfig = field(default_factory=RewardConfig)
    recommend: RecommendParams = field(default_factory=RecommendParams)
    pets: dict[str, EngineConfig] = field(default_factory=lambda: {"rex": EngineConfig()})
    personalities: dict[str, PersonalityVector] = field(default_factory=dict)
    props: dict[str, PropItem] = field(default_factory=lambda: dict(DEFAULT_PROPS))


def load_app_config(path) -> AppConfig:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    cfg = AppConfig()
    cfg.graph_path = raw.get("graph")
    cfg.checkpoint_path = raw.get("checkpoint", cfg.graph_path)
    cfg.checkpoint_every_s = float(raw.get("checkpoint_every_s", 0.0))
    if "reward" in raw:
        cfg.reward = reward_config_from_dict(raw["reward"])
    if "recommend" in raw:
        cfg.recommend = RecommendParams(**raw["recommend"])
    if "pets" in raw:
        cfg.pets = {}
        for pet in raw["pets"]:
            pet = dict(pet)
            pet_id = pet.pop("pet_id")
            personality = pet.pop("personality", None)
            if personality is not None:
                cfg.personalities[pet_id] = PersonalityVector(tuple(personality))
            cfg.pets[pet_id] = EngineConfig(**pet)
    if "props" in raw:
        cfg.props = {p["prop_id"]: PropItem(p["prop_id"], bool(p["liked"]), float(p["magnitude"]))
                     for p in raw["props"]}
    return cfg


def config_path_from_env() -> Optional[str]:
    return os.environ.get("PETSOCIAL_CONFIG")


class FeedRequest(BaseModel):
    prop_id: str


class EnvironmentRequest(BaseModel):
    readings: list[float]
    weights: Optional[list[float]] = None
    comfort_threshold: float = 0.5

    def to_frame(self) -> SensorFrame:
        weights = self.weights
        if weights is None:
            weights = [1.0 / len(self.readings)] * len(self.readings)
        return SensorFrame(tuple(self.readings), tuple(weights), self.comfort_threshold)


class PetRuntime:
    """Single-writer loop around one emotion engine."""

    def __init__(self, pet_id: str, engine: EmotionEngine, tick_seconds: float):
        self.pet_id = pet_id
        self.engine = engine
        self.tick_seconds = tick_seconds
        self.inbox: asyncio.Queue = asyncio.Queue()
        self.subscribers: set[asyncio.Queue] = set()
        self.last_frame = engine.snapshot()
        self._task: Optional[asyncio.Task] = None

    def submit(self, command: tuple) -> None:
        self.inbox.put_nowait(command)

    def subscribe(self) -> asyncio.Queue:
        q: asyncio.Queue = asyncio.Queue(maxsize=256)
        self.subscribers.add(q)
        return q

    def unsubscribe(self, q: asyncio.Queue) -> None:
        self.subscribers.discard(q)

    def apply_pending(self) -> None:
        while not self.inbox.empty():
            kind, payload = self.inbox.get_nowait()
            if kind == "feed":
                self.engine.feed(payload)
            elif kind == "environment":
                self.engine.sense_environment(payload)

    def tick_once(self) -> dict:
        self.apply_pending()
        frame = self.engine.tick()
        self.last_frame = frame
        for q in list(self.subscribers):
            if q.full():  # drop oldest; order stays intact
                with contextlib.suppress(asyncio.QueueEmpty):
                    q.get_nowait()
            q.put_nowait(frame)
        return frame

    async def loop(self) -> None:
        while True:
            self.tick_once()
            await asyncio.sleep(self.tick_seconds)

    def start(self) -> None:
        if self._task is None:
            self._task = asyncio.create_task(self.loop())

    async def stop(self) -> None:
        if self._task is not None:
            self._task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await self._task
            self._task = None


def create_app(config: AppConfig | None = None,
               graph: SocialGraph | None = None) -> FastAPI:
    config = config or AppConfig()
    if graph is None:
        if config.graph_path and os.path.exists(config.graph_path):
            graph = SocialGraph.load(config.graph_path, config.reward.params)
        else:
            graph = SocialGraph(config.reward.params)
    ledger = RewardLedger(config.reward)
    ledger.attach(graph)

    pets = {}
    for pet_id, engine_cfg in config.pets.items():
        engine = EmotionEngine(personality=config.personalities.get(pet_id),
                               config=engine_cfg)
        pets[pet_id] = PetRuntime(pet_id, engine, engine_cfg.tick_seconds)

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        checkpoint_task = None
        for runtime in pets.values():
            runtime.start()
        if config.checkpoint_every_s > 0 and config.checkpoint_path:
            async def checkpoint_loop():
                while True:
                    await asyncio.sleep(config.checkpoint_every_s)
                    graph.save(config.checkpoint_path)
            checkpoint_task = asyncio.create_task(checkpoint_loop())
        try:
            yield
        finally:
            for runtime in pets.values():
                await runtime.stop()
            if checkpoint_task is not None:
                checkpoint_task.cancel()
                with contextlib.suppress(asyncio.CancelledError):
                    await checkpoint_task
            if config.checkpoint_path:
                graph.save(config.checkpoint_path)

    app = FastAPI(title="petsocial", lifespan=lifespan)
    app.state.graph = graph
    app.state.ledger = ledger
    app.state.config = config
    app.state.pets = pets
    app.state.request_counts = {}

    def counted(name: str) -> None:
        app.state.request_counts[name] = app.state.request_counts.get(name, 0) + 1

    def pet_or_404(pet_id: str) -> PetRuntime:
        runtime = pets.get(pet_id)
        if runtime is None:
            raise HTTPException(status_code=404, detail=f"unknown pet: {pet_id}")
        return runtime

    @app.get("/pet/{pet_id}/state")
    def pet_state(pet_id: str) -> dict:
        counted("pet_state")
        return pet_or_404(pet_id).last_frame

    @app.post("/pet/{pet_id}/feed", status_code=202)
    def pet_feed(pet_id: str, body: FeedRequest) -> dict:
        counted("pet_feed")
        runtime = pet_or_404(pet_id)
        prop = config.props.get(body.prop_id)
        if prop is None:
            raise HTTPException(status_code=404, detail=f"unknown prop: {body.prop_id}")
        runtime.submit(("feed", prop))
        return {"queued_after_tick": runtime.last_frame["tick"]}

    @app.post("/pet/{pet_id}/environment", status_code=202)
    def pet_environment(pet_id: str, body: EnvironmentRequest) -> dict:
        counted("pet_environment")
        runtime = pet_or_404(pet_id)
        try:
            frame = body.to_frame()
        except (ValueError, PetSocialError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        runtime.submit(("environment", frame))
        return {"queued_after_tick": runtime.last_frame["tick"]}

    @app.get("/users/{user_id}/recommendations")
    def user_recommendations(user_id: str) -> list[dict]:
        counted("recommendations")
        try:
            recs = recommend(graph.snapshot(), user_id, config.recommend)
        except UnknownUserError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        return [{"candidate": r.candidate, "score": r.score, "phase": r.phase,
                 "explanation": r.explanation} for r in recs]

    @app.get("/users/{user_id}/reward")
    def user_reward(user_id: str) -> dict:
        counted("reward")
        snap = graph.snapshot()
        try:
            total = total_reward(snap, user_id)
        except UnknownUserError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        edges = [{"peer": nb, "m": snap.edge(user_id, nb).m,
                  "weight": edge_weight(snap.edge(user_id, nb).m, snap.reward_params)}
                 for nb in sorted(snap.neighbors(user_id))]
        entry = ledger.user(user_id)
        return {"total": total, "alpha": snap.reward_params.alpha, "edges": edges,
                "collective_activities": snap.user(user_id).collective_activities,
                "props": entry.props, "achievements": ledger.achievements_of(user_id)}

    @app.post("/tasks/{task_id}/complete")
    def complete_task(task_id: str) -> dict:
        counted("complete_task")
        try:
            edge = graph.complete_task(task_id)
        except UnknownTaskError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except AlreadyCompletedError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except ExpiredTaskError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return {"u": edge.u, "v": edge.v, "m": edge.m, "weight": edge.weight}

    @app.get("/graph")
    def graph_snapshot() -> dict:
        counted("graph")
        snap = graph.snapshot()
        return {
            "users": [{"user_id": u.user_id, "lat": u.latitude, "lon": u.longitude}
                      for u in snap.users.values()],
            "edges": [{"u": e.u, "v": e.v, "m": e.m, "weight": e.weight}
                      for e in snap.edges.values()],
        }

    @app.get("/metrics")
    def metrics() -> dict:
        counted("metrics")
        return {
            "pets": {pid: {"tick": rt.last_frame["tick"], "emotion": rt.last_frame["emotion"]}
                     for pid, rt in pets.items()},
            "graph": {"users": len(graph.users), "edges": len(graph.edges),
                      "tasks": len(graph.tasks), "clock": graph.clock},
            "requests": dict(app.state.request_counts),
            "reward_events": len(ledger.history),
        }

    @app.websocket("/pet/{pet_id}/stream")
    async def pet_stream(websocket: WebSocket, pet_id: str) -> None:
        runtime = pets.get(pet_id)
        if runtime is None:
            await websocket.close(code=4404)
            return
        await websocket.accept()
        queue = runtime.subscribe()

        async def receiver() -> None:
            while True:
                text = await websocket.receive_text()
                try:
                    msg = json.loads(text)
                    if msg.get("cmd") == "feed":
                        prop = config.props[msg["prop_id"]]
                        runtime.submit(("feed", prop))
                    elif msg.get("cmd") == "environment":
                        req = EnvironmentRequest(**{k: v for k, v in msg.items() if k != "cmd"})
                        runtime.submit(("environment", req.to_frame()))
                except (KeyError, ValueError, PetSocialError):
                    await websocket.send_text(json.dumps({"error": "bad command"}))

        async def sender() -> None:
            while True:
                frame = await queue.get()
                await websocket.send_text(json.dumps(frame))

        tasks = {asyncio.create_task(receiver()), asyncio.create_task(sender())}
        try:
            # either side ending (disconnect, send failure) tears the pair down
            await asyncio.wait(tasks, return_when=asyncio.FIRST_EXCEPTION)
        finally:
            for task in tasks:
                task.cancel()
                with contextlib.suppress(asyncio.CancelledError, WebSocketDisconnect,
                                         RuntimeError):
                    await task
            runtime.unsubscribe(queue)

    return app


def serve(config: AppConfig, host: str = "127.0.0.1", port: int = 8000) -> None:
    """Run the service until interrupted; persistence flushes on shutdown."""
    import uvicorn

    uvicorn.run(create_app(config), host=host, port=port, log_level="info")
