"""Command-line entry points.

Every subcommand takes `--config <file>` and `--out <dir>`; exit codes are
0 on success, 2 on validation failure, 3 on runtime failure.

    lidscore validate --config project.yaml
    lidscore storm    --config project.yaml --out results
    lidscore atrcr    --config project.yaml --out results
    lidscore simulate --config project.yaml --out results
    lidscore weights  --config project.yaml --out results
    lidscore evaluate --config project.yaml --out results
    lidscore rank     --config project.yaml --out results
    lidscore report   --config project.yaml --out results --format markdown
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from lidscore.config import load_config
from lidscore.errors import ConfigError, LidscoreError

EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


@click.group()
def main():
    """Evaluate and rank LID stormwater design scenarios."""


def _common(fn):
    @click.option("--config", "config_path", required=True,
                  type=click.Path(exists=False), help="Project YAML file.")
    @click.option("--out", "out_dir", default=None,
                  type=click.Path(), help="Output directory (default from config).")
    @functools.wraps(fn)
    def wrapper(config_path, out_dir, **kwargs):
        try:
            config = load_config(config_path)
        except ConfigError as exc:
            for line in exc.errors:
                click.echo(f"error: {line}", err=True)
            sys.exit(EXIT_VALIDATION)
        try:
            fn(config, Path(out_dir) if out_dir else config.output_dir, **kwargs)
        except ConfigError as exc:
            for line in exc.errors:
                click.echo(f"error: {line}", err=True)
            sys.exit(EXIT_VALIDATION)
        except LidscoreError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_RUNTIME)

    return wrapper


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_dir", default=None, type=click.Path(), hidden=True)
def validate(config_path, out_dir):
    """Check the project file and report every problem found."""
    try:
        config = load_config(config_path)
    except ConfigError as exc:
        for line in exc.errors:
            click.echo(f"error: {line}", err=True)
        sys.exit(EXIT_VALIDATION)
    click.echo(f"{config.path}: OK ({len(config.subcatchments)} subcatchments, "
               f"{len(config.scenarios)} scenarios)")


@main.command()
@_common
def storm(config, out_dir):
    """Generate the design-storm suite as CSV hyetographs."""
    from lidscore.pipeline import _Writer, build_storms

    writer = _Writer(out_dir)
    for name, hyeto in build_storms(config).items():
        path = writer.path("storms", f"storm_{name}.csv")
        hyeto.to_csv(path)
        click.echo(f"wrote {path} (depth {hyeto.depth_mm():.2f} mm, "
                   f"peak {hyeto.intensities_mm_hr.max():.1f} mm/hr)")


@main.command()
@_common
def atrcr(config, out_dir):
    """Capture-depth statistics from the configured rainfall record."""
    import numpy as np

    from lidscore.pipeline import _Writer
    from lidscore.storms import RainRecord, atrcr_curve, invert_atrcr

    if config.sizing is None or config.sizing.target.rainfall_csv is None:
        raise ConfigError("config has no sizing.target.rainfall_csv")
    record = RainRecord.from_csv(config.sizing.target.rainfall_csv)
    min_event = config.sizing.min_event_mm
    grid = [float(h) for h in np.arange(0.0, 61.0, 1.0)]
    curve = atrcr_curve(record, grid, min_event)
    writer = _Writer(out_dir)
    writer.write_rows(["depth_mm", "atrcr"],
                      [[repr(h), repr(r)] for h, r in sorted(curve.items())],
                      "atrcr_curve.csv")
    target = config.sizing.target.atrcr
    if target is not None:
        depth = invert_atrcr(record, target, min_event)
        click.echo(f"ATRCR {target:.0%} is reached at a capture depth of "
                   f"{depth:.2f} mm")
    click.echo(f"wrote {out_dir}/atrcr_curve.csv")


@main.command()
@_common
def simulate(config, out_dir):
    """Run baseline and scenario simulations; write hydrographs and loads."""
    from lidscore.pipeline import _Writer, _persist_runs, build_storms, simulate_all

    writer = _Writer(out_dir)
    runs = simulate_all(config, build_storms(config))
    _persist_runs(writer, config, runs)
    for label, storm_runs in runs.items():
        for run in storm_runs:
            worst = max(b.closure_error() for b in run.balances.values())
            click.echo(f"{label} / {run.storm}: volume "
                       f"{run.summary.volume_m3:.0f} m3, peak "
                       f"{run.summary.peak_lps:.0f} L/s, worst closure "
                       f"{worst:.2e}")


@main.command()
@_common
def weights(config, out_dir):
    """Resolve the indicator hierarchy weights (values or matrices)."""
    from lidscore.pipeline import _Writer

    tree, reports = config.weight_tree()
    writer = _Writer(out_dir)
    payload = {
        "tree": tree.to_dict(),
        "consistency": {
            node: {"lambda_max": r.lambda_max, "ci": r.ci, "ri": r.ri,
                   "cr": r.cr, "passed": r.passed}
            for node, r in sorted(reports.items())
        },
    }
    writer.write_json(payload, "weights.json")
    for node, r in sorted(reports.items()):
        click.echo(f"{node}: lambda_max {r.lambda_max:.4f}, CR {r.cr:.4f} "
                   f"({'ok' if r.passed else 'REJECTED'})")
    click.echo(f"wrote {out_dir}/weights.json")


@main.command()
@_common
def evaluate(config, out_dir):
    """Build the indicator tables (simulating where the hierarchy asks)."""
    from lidscore.pipeline import (_Writer, assemble_indicators, build_storms,
                                   simulate_all)

    tree, _ = config.weight_tree()
    runs = None
    if any(l.source == "simulated" for l in tree.leaves()):
        runs = simulate_all(config, build_storms(config))
    table, simulated = assemble_indicators(config, tree, runs)
    writer = _Writer(out_dir)
    if simulated is not None:
        path = writer.path("indicators", "simulated_environmental.csv")
        simulated.to_csv(path)
        click.echo(f"wrote {path}")
    path = writer.path("indicators", "normalized.csv")
    table.to_csv(path)
    click.echo(f"wrote {path}")


@main.command()
@click.option("--sensitivity", "sensitivity_node", default=None,
              help="Hierarchy node whose weight to perturb.")
@click.option("--delta", default=0.05, show_default=True,
              help="Weight perturbation for --sensitivity.")
@_common
def rank(config, out_dir, sensitivity_node, delta):
    """Run the full pipeline and print the scenario ranking."""
    from lidscore.pipeline import run_pipeline, weight_sensitivity

    manifest = run_pipeline(config, out_dir)
    if manifest.ranking:
        click.echo("ranking: " + " > ".join(manifest.ranking))
    else:
        click.echo("ranking: (no scenarios)")
    for name, ok in manifest.compliance.items():
        if not ok:
            click.echo(f"warning: {name} does not meet the required control volume")
    if sensitivity_node:
        outcome = weight_sensitivity(config, sensitivity_node, delta)
        path = Path(out_dir) / "sensitivity.json"
        with open(path, "w") as fh:
            json.dump(outcome, fh, indent=2, sort_keys=True)
            fh.write("\n")
        for key, entry in outcome["perturbations"].items():
            changed = "changes" if entry["top_changed"] else "keeps"
            click.echo(f"Δ{key}: top scenario {changed} "
                       f"({' > '.join(entry['ranking'])})")


@main.command()
@click.option("--format", "fmt", default="markdown", show_default=True,
              type=click.Choice(["markdown", "csv", "json"]))
@_common
def report(config, out_dir, fmt):
    """Full pipeline plus rendered summary tables."""
    from lidscore.pipeline import run_pipeline

    manifest = run_pipeline(config, out_dir, render=fmt)
    click.echo(f"wrote {len(manifest.files)} files under {out_dir}")
    if manifest.ranking:
        click.echo("ranking: " + " > ".join(manifest.ranking))


if __name__ == "__main__":
    main()
