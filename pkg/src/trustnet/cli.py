"""Command-line entry point: registry server, simulator, generator, analytics.

Every subcommand prints its fully-resolved configuration before doing any
work, so a run can be reproduced from its own output. Exit codes: 0 success,
1 usage error, 2 input or schema error, 3 internal invariant violation.
Randomized subcommands take their seed from the resolved configuration and
print it; no seed is ever derived from the clock. No subcommand mutates its
input files.

The default output directory is the current directory, overridable with the
TRUSTNET_DATA_DIR environment variable.
"""

from __future__ import annotations

import dataclasses
import json
import os
import sys
import time
from pathlib import Path

import click

from . import growth
from .analytics.report import analyze_snapshot, consistency_audit, render_table
from .charts import load_metrics, render_report_artifacts, sweep_csv
from .errors import InvariantViolationError, TrustNetError
from .registry import RegistryService
from .server import RegistryServer, STATS_PATH
from .sim import SimConfig, run_scenario
from .snapshot import StatsSnapshot

DATA_DIR_ENV = "TRUSTNET_DATA_DIR"


def _data_dir() -> Path:
    return Path(os.environ.get(DATA_DIR_ENV, "."))


def _print_header(subcommand: str, resolved: dict) -> None:
    click.echo(f"[trustnet {subcommand}] resolved configuration:")
    click.echo(json.dumps(resolved, indent=2, sort_keys=True))


def _read_snapshot(path: str) -> StatsSnapshot:
    return StatsSnapshot.from_json(Path(path).read_text(encoding="utf-8"))


@click.group()
@click.version_option(package_name="trustnet")
def cli() -> None:
    """Trust-gated overlay network: registry, simulator, generator, analytics."""


# --- serve-registry ---


@cli.command("serve-registry")
@click.option("--bind", default="127.0.0.1:4444", show_default=True,
              help="host:port for the packet service and stats endpoint.")
@click.option("--base-node-id", default=2, show_default=True, type=int,
              help="First node id to allocate.")
@click.option("--log", "log_path", default=None, type=click.Path(),
              help="Append-only event log; flushed on every mutation.")
def serve_registry(bind: str, base_node_id: int, log_path: str) -> None:
    """Run the registry until interrupted."""
    host, _, port_text = bind.rpartition(":")
    if not host or not port_text.isdigit():
        raise click.UsageError(f"--bind must be host:port, got {bind!r}")
    resolved = {
        "bind": bind,
        "base_node_id": base_node_id,
        "event_log": log_path,
        "stats_path": STATS_PATH,
    }
    _print_header("serve-registry", resolved)
    registry = (
        RegistryService.restore(log_path, base_node_id=base_node_id)
        if log_path is not None
        else RegistryService(base_node_id=base_node_id)
    )
    server = RegistryServer(registry=registry, host=host, port=int(port_text))
    server.start()
    click.echo(f"registry listening on {server.endpoint[0]}:{server.port}")
    try:
        while True:
            time.sleep(0.5)
    except KeyboardInterrupt:
        click.echo("interrupted; shutting down")
    finally:
        server.stop()


# --- simulate ---


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(),
              help="Scenario document (JSON).")
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="Snapshot output path.")
@click.option("--events", "events_path", default=None, type=click.Path(),
              help="Ground-truth event log output path.")
def simulate(config_path: str, seed: int, out_path: str, events_path: str) -> None:
    """Run one scenario; write the snapshot and its ground-truth event log."""
    config = SimConfig.read(config_path)
    if seed is not None:
        config = dataclasses.replace(config, seed=seed)
        config.validate()
    out = Path(out_path) if out_path else _data_dir() / "scenario_snapshot.json"
    events = (
        Path(events_path)
        if events_path
        else out.with_name(out.stem + ".events.jsonl")
    )
    resolved = {
        "config": config.to_dict(),
        "out": str(out),
        "events": str(events),
    }
    _print_header("simulate", resolved)
    result = run_scenario(config)
    result.snapshot.write(out)
    result.write_events(events)
    click.echo(
        f"wrote {out} ({len(result.snapshot.nodes)} nodes, "
        f"{len(result.snapshot.trust_edges)} trust records) and {events}"
    )


# --- generate ---


@cli.command()
@click.option("--preset", "preset_name", default=None,
              help=f"Named preset ({', '.join(growth.preset_names())}).")
@click.option("--config", "config_path", default=None, type=click.Path(),
              help="Growth configuration document (JSON).")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--set", "overrides", multiple=True, metavar="FIELD=VALUE",
              help="Dotted field override, e.g. mix.triadic=0.5 (repeatable).")
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="Snapshot output path.")
@click.option("--trace", "trace_path", default=None, type=click.Path(),
              help="Also write the growth event trace.")
def generate(preset_name, config_path, seed, overrides, out_path, trace_path):
    """Generate one synthetic network snapshot."""
    if preset_name is None and config_path is None:
        raise click.UsageError("provide --preset or --config")
    if config_path is not None:
        doc = json.loads(Path(config_path).read_text(encoding="utf-8"))
        config = growth.GrowthConfig.from_dict(doc)
    else:
        config = growth.preset(preset_name)
    for override in overrides:
        field, _, value = override.partition("=")
        if not _:
            raise click.UsageError(f"--set needs FIELD=VALUE, got {override!r}")
        config = growth.set_parameter(config, field, value)
    if seed is not None:
        config = dataclasses.replace(config, seed=seed)
        config.validate()
    out = Path(out_path) if out_path else _data_dir() / "generated_snapshot.json"
    resolved = {"config": config.to_dict(), "out": str(out)}
    if trace_path:
        resolved["trace"] = str(trace_path)
    _print_header("generate", resolved)
    snapshot, trace = growth.generate(config)
    snapshot.write(out)
    if trace_path:
        trace.write(trace_path)
    click.echo(
        f"wrote {out} ({len(snapshot.nodes)} nodes, "
        f"{len(snapshot.trust_edges)} trust records)"
    )


# --- analyze ---


@cli.command()
@click.argument("snapshot_path", type=click.Path())
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="Write the metrics document (JSON) here.")
@click.option("--k-min", default=10, show_default=True, type=int,
              help="Tail threshold for the heavy-tail fit.")
@click.option("--audit/--no-audit", default=False,
              help="Also print structural audit findings.")
def analyze(snapshot_path: str, out_path: str, k_min: int, audit: bool) -> None:
    """Compute the full metrics report for one snapshot."""
    resolved = {"snapshot": snapshot_path, "out": out_path, "k_min": k_min}
    _print_header("analyze", resolved)
    snapshot = _read_snapshot(snapshot_path)
    report = analyze_snapshot(snapshot, k_min=k_min)
    if out_path:
        Path(out_path).write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    click.echo(render_table(report))
    if audit:
        findings = consistency_audit(snapshot)
        if findings:
            for finding in findings:
                click.echo(f"audit: {finding}")
        else:
            click.echo("audit: no findings")
    if out_path:
        click.echo(f"wrote {out_path}")


# --- report ---


@cli.command()
@click.argument("metrics_path", type=click.Path())
@click.option("--charts", "charts_dir", default=None, type=click.Path(),
              help="Output directory for charts and histogram exports.")
def report(metrics_path: str, charts_dir: str) -> None:
    """Render charts and histogram exports from a metrics document."""
    out_dir = Path(charts_dir) if charts_dir else _data_dir() / "charts"
    resolved = {"metrics": metrics_path, "charts": str(out_dir)}
    _print_header("report", resolved)
    metrics = load_metrics(metrics_path)
    written = render_report_artifacts(metrics, out_dir)
    for path in written:
        click.echo(f"wrote {path}")


# --- sweep ---


def _parse_values(text: str) -> list[float]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise click.UsageError("range must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise click.UsageError("range step must be positive")
        count = int((stop - start) / step + 1e-9) + 1
        return [round(start + i * step, 10) for i in range(count)]
    return [float(p) for p in text.split(",") if p != ""]


def _parse_seeds(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p != ""]


@cli.command()
@click.argument("parameter")
@click.argument("values")
@click.option("--preset", "preset_name", default="paper-2026", show_default=True)
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--seeds", default="0", show_default=True,
              help="Comma-separated seed list.")
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="Results CSV path.")
def sweep(parameter, values, preset_name, config_path, seeds, out_path):
    """Sweep one growth parameter; one CSV row per (value, seed)."""
    if config_path is not None:
        doc = json.loads(Path(config_path).read_text(encoding="utf-8"))
        base = growth.GrowthConfig.from_dict(doc)
    else:
        base = growth.preset(preset_name)
    value_list = _parse_values(values)
    seed_list = _parse_seeds(seeds)
    out = Path(out_path) if out_path else _data_dir() / "sweep.csv"
    resolved = {
        "base_config": base.to_dict(),
        "parameter": parameter,
        "values": value_list,
        "seeds": seed_list,
        "out": str(out),
    }
    _print_header("sweep", resolved)
    rows = []
    for value, seed, metrics in growth.sweep(base, parameter, value_list, seed_list):
        fit = metrics.powerlaw_fit
        rows.append(
            {
                "value": value,
                "seed": seed,
                "node_count": metrics.node_count,
                "edges_nonself": metrics.edge_count_nonself,
                "self_loops": metrics.self_loop_count,
                "mean_degree_nonself": f"{metrics.mean_degree_nonself:.6f}",
                "giant_fraction": f"{metrics.giant_fraction:.6f}",
                "avg_clustering": f"{metrics.avg_clustering_all:.6f}",
                "gamma": f"{fit.gamma:.6f}" if fit is not None else "",
            }
        )
    columns = [
        "value",
        "seed",
        "node_count",
        "edges_nonself",
        "self_loops",
        "mean_degree_nonself",
        "giant_fraction",
        "avg_clustering",
        "gamma",
    ]
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(sweep_csv(rows, columns), encoding="utf-8")
    click.echo(f"wrote {out} ({len(rows)} rows)")


# --- entry point ---


def main(argv=None) -> int:
    """Run the CLI, mapping exception classes onto the exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except InvariantViolationError as exc:
        click.echo(f"invariant violation: {exc}", err=True)
        return 3
    except TrustNetError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except FileNotFoundError as exc:
        click.echo(f"file not found: {exc}", err=True)
        return 2
    except json.JSONDecodeError as exc:
        click.echo(f"malformed document: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
