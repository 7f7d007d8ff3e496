"""Command-line front door: batch simulation, terminal sessions, service."""

from __future__ import annotations

import json
import statistics
import sys
from pathlib import Path

import click

from .batch import desk_profile, export_transcript, run_batch
from .config import ConfigError, load_engine_setup, load_personas, resolve_graph
from .engine import RawFeedback, interaction_length, new_session, step
from .graph import GraphLoadError
from .partner import expectations

EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 3


def _load_graph_or_exit(spec: str):
    try:
        return resolve_graph(spec)
    except (ConfigError, GraphLoadError) as exc:
        raise click.exceptions.Exit(_config_error(str(exc)))


def _config_error(message: str) -> int:
    click.echo(f"configuration error: {message}", err=True)
    return EXIT_CONFIG_ERROR


@click.group()
def main():
    """Adaptive explanation engine."""


@main.command()
@click.option("--graph", required=True, help="Graph file path or fixture name.")
@click.option("--personas", "personas_spec", default="all", show_default=True,
              help="Persona config file, or 'all' for the built-in set.")
@click.option("--runs", default=20, show_default=True, help="Runs per persona.")
@click.option("--seed", default=7, show_default=True, help="Base random seed.")
@click.option("--out", "out_dir", default="out", show_default=True,
              type=click.Path(path_type=Path), help="Export directory.")
@click.option("--config", "config_path", default=None,
              type=click.Path(path_type=Path),
              help="Engine/belief config file (defaults to the desk profile).")
def simulate(graph, personas_spec, runs, seed, out_dir, config_path):
    """Run a simulation batch and write runs.csv, cycles.csv, summary.json."""
    if runs < 1:
        raise click.exceptions.Exit(_config_error("--runs must be >= 1"))
    try:
        kg = resolve_graph(graph)
        personas = load_personas(personas_spec)
        if config_path is not None:
            cfg, params = load_engine_setup(config_path)
        else:
            cfg, params = desk_profile(), None
    except (ConfigError, GraphLoadError) as exc:
        raise click.exceptions.Exit(_config_error(str(exc)))
    try:
        stats = run_batch(kg, personas, cfg, params, n_runs=runs,
                          base_seed=seed, out_dir=out_dir)
    except Exception as exc:  # pragma: no cover - defensive
        click.echo(f"simulation failed: {exc}", err=True)
        raise click.exceptions.Exit(EXIT_RUNTIME_ERROR)
    click.echo(f"{'persona':<10} {'runs':>4} {'mean':>8} {'std':>7} "
               f"{'provide':>8} {'deepen':>7} {'answer':>7}")
    for persona in stats.personas():
        lengths = stats.lengths(persona)
        acts = stats.action_counts(persona)
        click.echo(f"{persona:<10} {len(lengths):>4} "
                   f"{statistics.fmean(lengths):>8.2f} "
                   f"{(statistics.stdev(lengths) if len(lengths) > 1 else 0.0):>7.2f} "
                   f"{acts.get('provide', 0):>8} {acts.get('deepen', 0):>7} "
                   f"{acts.get('answer', 0):>7}")
    click.echo(f"exports written to {out_dir}")


INTERACT_HELP = """\
Feedback commands:
  +             positive backchannel
  -             negative backchannel
  ?p [+|-] ID   polar question about triple ID (default negative)
  ?o [+|-] ID   open question about triple ID
  <enter>       no feedback
  :pm           show partner expectations
  :kb           show per-triple understanding
  :help         this text
  EOF (Ctrl-D)  save transcript and quit
"""


def _parse_question(parts: list[str]) -> tuple[str, str]:
    polarity = "negative"
    rest = parts[1:]
    if rest and rest[0] in ("+", "-"):
        polarity = "positive" if rest[0] == "+" else "negative"
        rest = rest[1:]
    if len(rest) != 1:
        raise ValueError("usage: ?p [+|-] <triple-id>")
    return polarity, rest[0]


@main.command()
@click.option("--graph", required=True, help="Graph file path or fixture name.")
@click.option("--seed", default=0, show_default=True)
@click.option("--config", "config_path", default=None,
              type=click.Path(path_type=Path))
@click.option("--transcript", "transcript_path", default="transcript.jsonl",
              show_default=True, type=click.Path(path_type=Path))
def interact(graph, seed, config_path, transcript_path):
    """Interactive terminal session: you are the explainee."""
    kg = _load_graph_or_exit(graph)
    try:
        cfg, params = load_engine_setup(config_path)
    except ConfigError as exc:
        raise click.exceptions.Exit(_config_error(str(exc)))
    session = new_session(kg, cfg, params, seed=seed)
    click.echo(INTERACT_HELP)
    feedback = RawFeedback(kind="none")
    while not session.done:
        turn = step(session, feedback)
        for text in turn.utterances:
            click.echo(f"agent> {text}")
        if turn.done:
            break
        feedback = None
        while feedback is None:
            try:
                line = input("you> ").strip()
            except EOFError:
                click.echo("")
                export_transcript(session, transcript_path)
                click.echo(f"transcript saved to {transcript_path}")
                return
            if line == "":
                feedback = RawFeedback(kind="none")
            elif line == "+":
                feedback = RawFeedback(kind="backchannel_positive")
            elif line == "-":
                feedback = RawFeedback(kind="backchannel_negative")
            elif line == ":pm":
                pm = expectations(session.partner, session.params)
                click.echo("  " + "  ".join(f"{k}={v:.3f}" for k, v in pm.items()))
            elif line == ":kb":
                for tid, triple in sorted(session.graph.triples.items()):
                    if triple.lou is not None:
                        click.echo(f"  {tid}: {triple.lou:.3f}")
            elif line == ":help":
                click.echo(INTERACT_HELP)
            elif line.startswith("?p") or line.startswith("?o"):
                qtype = "polar" if line.startswith("?p") else "open"
                try:
                    polarity, target = _parse_question(line.split())
                    feedback = RawFeedback(kind="substantive", question_type=qtype,
                                           target_triple=target, polarity=polarity)
                    session.graph.require(target)
                except (ValueError, KeyError) as exc:
                    click.echo(f"  {exc}")
                    feedback = None
            else:
                click.echo("  unrecognized input; :help lists the commands")
    export_transcript(session, transcript_path)
    click.echo(f"explanation finished after {interaction_length(session)} turns; "
               f"transcript saved to {transcript_path}")


@main.command()
@click.option("--graph", "graphs", multiple=True, default=("quarto",),
              show_default=True, help="Graph fixtures to serve (repeatable).")
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--config", "config_path", default=None,
              type=click.Path(path_type=Path))
@click.option("--frontend", "frontend_dir", default="frontend",
              show_default=True, type=click.Path(path_type=Path),
              help="Directory with the built browser client (index.html).")
def serve(graphs, port, host, config_path, frontend_dir):
    """Run the session service for browser clients."""
    import uvicorn

    from .service.app import create_app

    frontend = frontend_dir if (frontend_dir / "index.html").is_file() else None
    try:
        app = create_app(graph_specs=list(graphs), config_path=config_path,
                         frontend_dir=frontend)
    except (ConfigError, GraphLoadError) as exc:
        raise click.exceptions.Exit(_config_error(str(exc)))
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--graph", default=None, help="Graph file path or fixture name.")
@click.option("--pm-config", "pm_config", default=None,
              type=click.Path(path_type=Path), help="Engine/belief config file.")
def inspect(graph, pm_config):
    """Validate a graph or config file and print a summary."""
    if graph is None and pm_config is None:
        raise click.exceptions.Exit(
            _config_error("pass --graph and/or --pm-config"))
    if graph is not None:
        kg = _load_graph_or_exit(graph)
        mandatory = sum(1 for t in kg.triples.values() if t.mandatory)
        click.echo(f"graph: {len(kg.triples)} triples ({mandatory} mandatory), "
                   f"{len(kg.blocks)} blocks, {len(kg.concepts)} concepts")
        for block in kg.blocks:
            ids = kg.block_triples[block]
            m = sum(1 for t in ids if kg.triples[t].mandatory)
            click.echo(f"  {block}: {len(ids)} triples ({m} mandatory)")
    if pm_config is not None:
        try:
            cfg, params = load_engine_setup(pm_config)
        except ConfigError as exc:
            raise click.exceptions.Exit(_config_error(str(exc)))
        click.echo("engine: " + json.dumps({
            "alpha": cfg.alpha, "kappa": cfg.kappa, "beta": cfg.beta,
            "gth": cfg.gth, "fb_gain": cfg.fb_gain, "fb_loss": cfg.fb_loss,
            "mcts_iterations": cfg.mcts_iterations, "horizon": cfg.horizon,
            "silence_uptake": cfg.silence_uptake}, sort_keys=True))
        click.echo("belief tables validated")


if __name__ == "__main__":
    sys.exit(main())
