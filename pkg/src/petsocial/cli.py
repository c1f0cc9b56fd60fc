"""Command-line front end.

Subcommands: ``sim run``, ``sim trial``, ``pet repl``, ``recommend``,
``graph import|export``, ``reward show``, ``serve``.  Every subcommand is
deterministic given its seed flags and exits non-zero with a one-line
diagnostic on error.
"""

from __future__ import annotations

import json
import sys
from dataclasses import asdict

import click

from . import simulator
from .emotion import EmotionEngine, EngineConfig, PropItem, SensorFrame, trace_record
from .errors import PetSocialError
from .graph import SocialGraph
from .recommend import RecommendParams, recommend as recommend_for
from .rewards import RewardParams, edge_weight, load_reward_config, total_reward
from .service import DEFAULT_PROPS, AppConfig, config_path_from_env, load_app_config
from .simulator import SimConfig, TrialConfig, run, run_emotion_trial


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _load_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        _fail(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        _fail(f"config file {path} is not valid JSON: {exc}")


def _sim_config_from_dict(raw: dict) -> SimConfig:
    raw = dict(raw)
    if "reward" in raw:
        raw["reward"] = RewardParams(**raw["reward"])
    if "recommend" in raw:
        raw["recommend"] = RecommendParams(**raw["recommend"])
    if "split" in raw:
        raw["split"] = tuple(raw["split"])
    if "loneliness" in raw:
        lb = dict(raw["loneliness"])
        if "cuts" in lb:
            lb["cuts"] = tuple(lb["cuts"])
        raw["loneliness"] = simulator.LonelinessBands(**lb)
    return SimConfig(**raw)


def _recommend_params(path) -> RecommendParams:
    if path is None:
        return RecommendParams()
    return RecommendParams(**_load_json(path))


@click.group()
def main() -> None:
    """Pet-robot social platform toolkit."""


# ----------------------------------------------------------------------- sim


@main.group()
def sim() -> None:
    """Run desk-scale experiments."""


@sim.command("run")
@click.option("--config", "config_path", type=str, default=None, help="JSON simulation config")
@click.option("--seed", type=int, default=None, help="override the config seed")
@click.option("--out", "out_path", type=str, default=None, help="write metrics records as JSON lines")
@click.option("--csv", "csv_path", type=str, default=None, help="write a plot-ready CSV")
def sim_run(config_path, seed, out_path, csv_path) -> None:
    """Run the two-group platform experiment and print a summary table."""
    raw = _load_json(config_path) if config_path else {}
    try:
        if seed is not None:
            raw["seed"] = seed
        config = _sim_config_from_dict(raw)
        metrics = run(config)
    except (PetSocialError, ValueError, TypeError) as exc:
        _fail(str(exc))
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            for record in metrics.to_records():
                fh.write(json.dumps(record) + "\n")
    if csv_path:
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write("week,treatment_time,control_time,treatment_circle,control_circle\n")
            for w in range(metrics.weeks):
                fh.write(f"{w + 1},{metrics.treatment_time[w]},{metrics.control_time[w]},"
                         f"{metrics.treatment_circle[w]},{metrics.control_circle[w]}\n")
    click.echo("week  treat_time  ctrl_time  treat_circle  ctrl_circle")
    for w in range(metrics.weeks):
        click.echo(f"{w + 1:4d}  {metrics.treatment_time[w]:10.3f}  {metrics.control_time[w]:9.3f}"
                   f"  {metrics.treatment_circle[w]:12.3f}  {metrics.control_circle[w]:11.3f}")
    for group in ("treatment", "control"):
        bands = metrics.loneliness[group]
        click.echo(f"loneliness[{group}]: " + "  ".join(f"{b}={bands[b]}" for b in simulator.BANDS))


@sim.command("trial")
@click.option("--config", "config_path", type=str, default=None, help="JSON trial config")
@click.option("--seed", type=int, default=None)
def sim_trial(config_path, seed) -> None:
    """Run the breeder-pet interaction trial."""
    raw = _load_json(config_path) if config_path else {}
    try:
        if seed is not None:
            raw["seed"] = seed
        if "satisfaction_cuts" in raw:
            raw["satisfaction_cuts"] = tuple(raw["satisfaction_cuts"])
        result = run_emotion_trial(TrialConfig(**raw))
    except (PetSocialError, ValueError, TypeError) as exc:
        _fail(str(exc))
    for level in simulator.SATISFACTION_LEVELS:
        click.echo(f"{level}: {result.satisfaction[level]}")
    click.echo(f"interactions: {result.interactions}")


# ----------------------------------------------------------------------- pet


@main.group()
def pet() -> None:
    """Interact with a pet engine."""


@pet.command("repl")
@click.option("--seed", type=int, default=0)
@click.option("--k", type=int, default=3)
@click.option("--transition-every", type=int, default=10)
@click.option("--trace", "trace_path", type=str, default=None, help="append state lines here")
def pet_repl(seed, k, transition_every, trace_path) -> None:
    """Headless interactive loop.

    Commands: feed <prop_id> | props | env <r1,r2,...> [threshold] |
    tick [n] | state | quit
    """
    try:
        engine = EmotionEngine(config=EngineConfig(k=k, transition_every=transition_every, seed=seed))
    except (PetSocialError, ValueError) as exc:
        _fail(str(exc))
    trace = open(trace_path, "a", encoding="utf-8") if trace_path else None

    def emit(snapshot: dict) -> None:
        line = trace_record(snapshot)
        click.echo(line)
        if trace:
            trace.write(line + "\n")

    emit(engine.snapshot())
    for raw in sys.stdin:
        parts = raw.strip().split()
        if not parts:
            continue
        cmd, args = parts[0], parts[1:]
        try:
            if cmd == "quit":
                break
            elif cmd == "props":
                for prop in DEFAULT_PROPS.values():
                    click.echo(f"{prop.prop_id} liked={prop.liked} magnitude={prop.magnitude}")
            elif cmd == "feed":
                prop = DEFAULT_PROPS.get(args[0])
                if prop is None:
                    prop = PropItem(args[0], args[1] == "liked", float(args[2]))
                engine.feed(prop)
                emit(engine.snapshot())
            elif cmd == "env":
                readings = tuple(float(x) for x in args[0].split(","))
                threshold = float(args[1]) if len(args) > 1 else 0.5
                weights = (1.0 / len(readings),) * len(readings)
                engine.sense_environment(SensorFrame(readings, weights, threshold))
                emit(engine.snapshot())
            elif cmd == "tick":
                for _ in range(int(args[0]) if args else 1):
                    emit(engine.tick())
            elif cmd == "state":
                emit(engine.snapshot())
            else:
                click.echo(f"unknown command: {cmd}", err=True)
        except (PetSocialError, ValueError, IndexError) as exc:
            click.echo(f"error: {exc}", err=True)
    if trace:
        trace.close()


# ----------------------------------------------------------------- recommend


@main.command("recommend")
@click.option("--user", "user_id", required=True)
@click.option("--graph", "graph_path", required=True, type=str)
@click.option("--config", "config_path", type=str, default=None, help="JSON recommendation params")
def recommend_cmd(user_id, graph_path, config_path) -> None:
    """Print ranked recommendations as line-delimited records."""
    try:
        graph = SocialGraph.load(graph_path)
        params = _recommend_params(config_path)
        recs = recommend_for(graph, user_id, params)
    except FileNotFoundError:
        _fail(f"graph file not found: {graph_path}")
    except (PetSocialError, ValueError, TypeError) as exc:
        _fail(str(exc))
    for rec in recs:
        extra = " ".join(f"{k}={v}" for k, v in sorted(rec.explanation.items()))
        click.echo(f"candidate={rec.candidate} score={rec.score!r} phase={rec.phase} {extra}")


# ----------------------------------------------------------------------- graph


@main.group("graph")
def graph_group() -> None:
    """Import or export graph files."""


@graph_group.command("export")
@click.option("--graph", "graph_path", required=True, type=str)
def graph_export(graph_path) -> None:
    """Validate a graph file and write its records to stdout."""
    try:
        graph = SocialGraph.load(graph_path)
    except FileNotFoundError:
        _fail(f"graph file not found: {graph_path}")
    except (PetSocialError, ValueError) as exc:
        _fail(str(exc))
    for line in graph.to_lines():
        click.echo(line)


@graph_group.command("import")
@click.option("--out", "out_path", required=True, type=str)
def graph_import(out_path) -> None:
    """Read graph records from stdin and save them to a file."""
    try:
        graph = SocialGraph.from_lines(sys.stdin)
        graph.save(out_path)
    except (PetSocialError, ValueError) as exc:
        _fail(str(exc))
    click.echo(f"imported {len(graph.users)} users, {len(graph.edges)} edges, "
               f"{len(graph.stores)} stores, {len(graph.tasks)} tasks -> {out_path}")


# ----------------------------------------------------------------------- reward


@main.group("reward")
def reward_group() -> None:
    """Inspect reward state."""


@reward_group.command("show")
@click.option("--user", "user_id", required=True)
@click.option("--graph", "graph_path", required=True, type=str)
@click.option("--config", "config_path", type=str, default=None, help="reward config JSON")
def reward_show(user_id, graph_path, config_path) -> None:
    """Print a user's total reward and per-edge weights."""
    try:
        params = load_reward_config(config_path).params if config_path else RewardParams()
        graph = SocialGraph.load(graph_path, params)
        total = total_reward(graph, user_id, params)
    except FileNotFoundError as exc:
        _fail(str(exc))
    except (PetSocialError, ValueError) as exc:
        _fail(str(exc))
    profile = graph.user(user_id)
    click.echo(f"user={user_id} total={total!r} alpha={params.alpha!r} "
               f"collective_activities={profile.collective_activities}")
    for nb in sorted(graph.neighbors(user_id)):
        edge = graph.edge(user_id, nb)
        click.echo(f"edge peer={nb} m={edge.m} weight={edge_weight(edge.m, params)!r}")


# ----------------------------------------------------------------------- serve


@main.command("serve")
@click.option("--config", "config_path", type=str, default=None,
              help="service config JSON (defaults to $PETSOCIAL_CONFIG)")
@click.option("--host", type=str, default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve_cmd(config_path, host, port) -> None:
    """Run the HTTP/stream service."""
    from .service import serve

    path = config_path or config_path_from_env()
    try:
        config = load_app_config(path) if path else AppConfig()
    except FileNotFoundError:
        _fail(f"config file not found: {path}")
    except (PetSocialError, ValueError, KeyError) as exc:
        _fail(f"malformed config {path}: {exc}")
    try:
        serve(config, host=host, port=port)
    except OSError as exc:  # port busy and friends
        _fail(str(exc))


if __name__ == "__main__":
    main()
