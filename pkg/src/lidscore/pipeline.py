"""End-to-end evaluation pipeline and result persistence.

Stages: sizing check -> design storms -> baseline and scenario simulations
(skipped entirely when every hierarchy leaf is direct-injected) ->
indicator tables -> weighting -> normalization -> roll-up -> ranking ->
capacity compliance flags. All result files are written deterministically:
rerunning an identical config byte-reproduces them (only the manifest
carries a timestamp).
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import platform
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

import lidscore
from lidscore import kernels
from lidscore.config import ProjectConfig
from lidscore.errors import ConfigError, LidscoreError, ValidationError
from lidscore.evaluator import (IndicatorTable, StormSummary, WeightTree,
                                evaluate_environmental,
                                facility_indicator_scores, normalize, rollup)
from lidscore.hydrology import (Hydrograph, route, route_series,
                                simulate_subcatchment)
from lidscore.lid import control_capacity, existing_capacity, required_volume
from lidscore.quality import simulate_quality
from lidscore.storms import (RainRecord, atrcr_curve, design_storm_suite,
                             invert_atrcr)

MASS_BALANCE_LIMIT = 0.005
ZERO_COLUMN_POLICY = {"peak_delay": "uniform"}


@dataclass
class StormRun:
    """One run label (baseline or scenario) under one storm."""

    label: str
    storm: str
    outfall_hydrographs: dict
    outfall_load_series: dict   # outfall -> pollutant -> np.ndarray
    balances: dict              # subcatchment -> WaterBalance
    summary: StormSummary


@dataclass
class SizingSummary:
    psi: float
    area_ha: float
    target_depth_mm: float
    existing_m3: float
    existing_depth_mm: float
    required_m3: float
    capacities_m3: dict
    atrcr_points: dict | None = None

    def compliant(self, scenario: str) -> bool:
        return self.capacities_m3[scenario] >= self.required_m3

    def to_dict(self) -> dict:
        return {
            "composite_runoff_coefficient": self.psi,
            "catchment_area_ha": self.area_ha,
            "target_depth_mm": self.target_depth_mm,
            "existing_capacity_m3": self.existing_m3,
            "existing_capacity_depth_mm": self.existing_depth_mm,
            "required_volume_m3": self.required_m3,
            "scenario_capacity_m3": dict(sorted(self.capacities_m3.items())),
            "compliance": {
                name: self.compliant(name) for name in sorted(self.capacities_m3)
            },
        }


@dataclass
class RunManifest:
    config_hash: str
    package_version: str
    kernel_backend: str
    created_utc: str
    storms: list
    ranking: list
    compliance: dict
    files: dict = field(default_factory=dict)
    versions: dict = field(default_factory=dict)

    def to_json(self, path) -> None:
        payload = {
            "config_hash": self.config_hash,
            "package_version": self.package_version,
            "kernel_backend": self.kernel_backend,
            "created_utc": self.created_utc,
            "storms": self.storms,
            "ranking": self.ranking,
            "compliance": self.compliance,
            "versions": dict(sorted(self.versions.items())),
            "files": dict(sorted(self.files.items())),
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


class _Writer:
    """Tracks every emitted file and its content hash for the manifest."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.files: dict = {}

    def path(self, *parts) -> Path:
        p = self.out_dir.joinpath(*parts)
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def record(self, path: Path) -> None:
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        self.files[str(path.relative_to(self.out_dir))] = digest

    def write_json(self, obj, *parts) -> Path:
        p = self.path(*parts)
        with open(p, "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
        self.record(p)
        return p

    def write_rows(self, header, rows, *parts) -> Path:
        p = self.path(*parts)
        with open(p, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        self.record(p)
        return p


def storm_label(depth_mm: float) -> str:
    return f"{depth_mm:g}mm"


def build_storms(config: ProjectConfig):
    s = config.storms
    if s is None:
        raise ConfigError("no storm settings in config")
    suite = design_storm_suite(s.depths_mm, s.duration_min, s.peak_ratio,
                               s.idf, s.step_s)
    return {storm_label(d): storm for d, storm in zip(s.depths_mm, suite)}


def compute_sizing(config: ProjectConfig) -> SizingSummary | None:
    if config.sizing is None:
        return None
    land_uses = [lu for sc in config.subcatchments.values() for lu in sc.land_uses]
    if config.sizing.psi is not None:
        psi = config.sizing.psi
    elif land_uses:
        psi = (sum(lu.runoff_coefficient * lu.area_ha for lu in land_uses)
               / sum(lu.area_ha for lu in land_uses))
    else:
        raise ConfigError("sizing needs land uses or an explicit sizing.psi")
    if config.sizing.area_ha is not None:
        area_ha = config.sizing.area_ha
    elif config.subcatchments:
        area_ha = sum(sc.area_ha for sc in config.subcatchments.values())
    else:
        raise ConfigError("sizing needs subcatchments or an explicit sizing.area_ha")
    target = config.sizing.target
    atrcr_points = None
    if target.depth_mm is not None:
        depth = float(target.depth_mm)
    else:
        record = RainRecord.from_csv(target.rainfall_csv)
        depth = invert_atrcr(record, target.atrcr, config.sizing.min_event_mm)
        grid = [float(h) for h in np.arange(0.0, 61.0, 1.0)]
        atrcr_points = atrcr_curve(record, grid, config.sizing.min_event_mm)
    existing_m3, existing_depth = existing_capacity(
        config.sizing.existing_facilities, psi, area_ha
    )
    required = required_volume(depth, psi, area_ha, existing_m3)
    capacities = {
        sc.name: control_capacity(sc, config.catalog) for sc in config.scenarios
    }
    return SizingSummary(
        psi=psi, area_ha=area_ha, target_depth_mm=depth,
        existing_m3=existing_m3, existing_depth_mm=existing_depth,
        required_m3=required, capacities_m3=capacities,
        atrcr_points=atrcr_points,
    )


def simulate_run(config: ProjectConfig, storm, label: str,
                 storm_name: str, scenario=None) -> StormRun:
    """Simulate every subcatchment, route to the outfalls and summarize."""
    dt = config.storms.step_s
    node_flows: dict = {}
    node_loads: dict = {p.name: {} for p in config.pollutants}
    balances: dict = {}
    for sc in config.subcatchments.values():
        placements = []
        if scenario is not None:
            placements = [p for p in scenario.placements if p.subcatchment == sc.id]
        hydro, balance, detail = simulate_subcatchment(
            sc, storm, placements, config.catalog,
            sim_step_s=dt, tail_min=config.storms.tail_min,
        )
        closure = balance.closure_error()
        if closure > MASS_BALANCE_LIMIT:
            raise LidscoreError(
                f"{label}/{storm_name}/{sc.id}: water balance closure "
                f"{closure:.2%} exceeds {MASS_BALANCE_LIMIT:.1%}"
            )
        balances[sc.id] = balance
        flows = node_flows.setdefault(sc.outlet, np.zeros(hydro.flows_lps.size))
        flows += hydro.flows_lps
        for spec in config.pollutants:
            pollutograph = simulate_quality(
                sc, detail.pre_lid_runoff_m3, spec, dt,
                config.antecedent_dry_days, placements,
            )
            loads = node_loads[spec.name].setdefault(
                sc.outlet, np.zeros(pollutograph.loads_kg.size)
            )
            loads += pollutograph.loads_kg

    inflows = {
        node: Hydrograph(site=node, step_s=dt, flows_lps=flows)
        for node, flows in node_flows.items()
    }
    outfall_hydro = route(inflows, config.links)
    outfall_load_series: dict = {}
    for pollutant, per_node in node_loads.items():
        routed = route_series(per_node, config.links, dt)
        for outfall, series in routed.items():
            outfall_load_series.setdefault(outfall, {})[pollutant] = series
    load_totals = {
        outfall: {p: float(series.sum()) for p, series in sorted(by_p.items())}
        for outfall, by_p in outfall_load_series.items()
    }
    summary = StormSummary.from_outfalls(storm_name, outfall_hydro, load_totals)
    return StormRun(
        label=label, storm=storm_name,
        outfall_hydrographs=outfall_hydro,
        outfall_load_series=outfall_load_series,
        balances=balances, summary=summary,
    )


def simulate_all(config: ProjectConfig, storms: dict) -> dict:
    """Baseline plus every scenario, for every storm. Returns
    {run label: [StormRun in storm order]} with 'baseline' first."""
    runs: dict = {"baseline": []}
    for storm_name, storm in storms.items():
        runs["baseline"].append(
            simulate_run(config, storm, "baseline", storm_name, None)
        )
    for scenario in config.scenarios:
        runs[scenario.name] = [
            simulate_run(config, storm, scenario.name, storm_name, scenario)
            for storm_name, storm in storms.items()
        ]
    return runs


def _persist_runs(writer: _Writer, config: ProjectConfig, runs: dict) -> None:
    for label, storm_runs in runs.items():
        for run in storm_runs:
            base = ("results", label, run.storm)
            for outfall, hydro in run.outfall_hydrographs.items():
                rows = [
                    [repr(k * hydro.step_s), repr(float(q))]
                    for k, q in enumerate(hydro.flows_lps)
                ]
                writer.write_rows(["t_s", "flow_Lps"], rows,
                                  *base, f"hydro_{outfall}.csv")
            for outfall, by_pollutant in run.outfall_load_series.items():
                hydro = run.outfall_hydrographs[outfall]
                for pollutant, series in by_pollutant.items():
                    rows = []
                    for k, load in enumerate(series):
                        flow = hydro.flows_lps[k] if k < hydro.flows_lps.size else 0.0
                        conc = repr(float(load) * 1e6 / (float(flow) * hydro.step_s)) if flow > 0 else ""
                        rows.append([repr(k * hydro.step_s), repr(float(load)), conc])
                    writer.write_rows(["t_s", "load_kg", "conc_mg_L"], rows,
                                      *base, f"quality_{outfall}_{pollutant}.csv")
            rows = [
                [sc_id, repr(float(b.rainfall_m3)), repr(float(b.runoff_m3)),
                 repr(float(b.infiltration_m3)), repr(float(b.surface_storage_m3)),
                 repr(float(b.lid_captured_m3)), repr(float(b.closure_error()))]
                for sc_id, b in sorted(run.balances.items())
            ]
            writer.write_rows(
                ["subcatchment", "rainfall_m3", "runoff_m3", "infiltration_m3",
                 "surface_storage_m3", "lid_captured_m3", "closure_error"],
                rows, *base, "water_balance.csv",
            )


def _load_direct_tables(config: ProjectConfig):
    raw_tables = []
    normalized_tables = []
    order = [sc.name for sc in config.scenarios]
    for entry in config.direct_tables:
        table = IndicatorTable.from_csv(entry.path, normalized=entry.normalized)
        if sorted(table.scenarios) != sorted(order):
            raise ConfigError(
                f"{entry.path}: scenarios {table.scenarios} do not match "
                f"config scenarios {order}"
            )
        idx = [table.scenarios.index(name) for name in order]
        table = IndicatorTable(order, list(table.indicators),
                               table.values[idx, :], normalized=entry.normalized)
        (normalized_tables if entry.normalized else raw_tables).append(table)
    return raw_tables, normalized_tables


def assemble_indicators(config: ProjectConfig, tree: WeightTree,
                        runs: dict | None) -> tuple:
    """Build the normalized leaf table feeding the roll-up.

    Returns (normalized table, simulated raw environmental table or None).
    Raw columns (simulated, facility-derived, raw direct files) pass
    through linear normalization; pre-normalized direct files are used
    verbatim.
    """
    leaves = list(tree.leaves())
    scenario_names = [sc.name for sc in config.scenarios]
    raw_parts = []
    simulated_table = None

    sim_leaves = [l for l in leaves if l.source == "simulated"]
    if sim_leaves:
        if runs is None:
            raise ConfigError("hierarchy has simulated leaves but nothing was simulated")
        by_scenario = {
            name: [r.summary for r in storm_runs]
            for name, storm_runs in runs.items() if name != "baseline"
        }
        simulated_table = evaluate_environmental(
            [r.summary for r in runs["baseline"]],
            by_scenario,
            [p.name for p in config.pollutants],
        )
        missing = [l.indicator for l in sim_leaves
                   if l.indicator not in simulated_table.indicators]
        if missing:
            raise ConfigError(f"simulation provides no indicators {missing}")
        raw_parts.append(IndicatorTable(
            simulated_table.scenarios,
            [l.indicator for l in sim_leaves],
            np.column_stack([simulated_table.column(l.indicator) for l in sim_leaves]),
        ))

    fac_leaves = [l for l in leaves if l.source == "facility_derived"]
    if fac_leaves:
        raw_parts.append(
            facility_indicator_scores(config.scenarios, config.catalog, fac_leaves)
        )

    raw_direct, pre_normalized = _load_direct_tables(config)
    direct_leaves = [l for l in leaves if l.source == "direct"]
    direct_columns: dict = {}
    for table in raw_direct:
        for indicator in table.indicators:
            direct_columns[indicator] = (table, False)
    for table in pre_normalized:
        for indicator in table.indicators:
            direct_columns[indicator] = (table, True)

    raw_cols: dict = {}
    norm_cols: dict = {}
    for part in raw_parts:
        for indicator in part.indicators:
            raw_cols[indicator] = part.column(indicator)
    for leaf in direct_leaves:
        if leaf.indicator not in direct_columns:
            raise ConfigError(
                f"leaf {leaf.name!r}: no direct table provides "
                f"{leaf.indicator!r}"
            )
        table, already = direct_columns[leaf.indicator]
        if already:
            norm_cols[leaf.indicator] = table.column(leaf.indicator)
        else:
            raw_cols[leaf.indicator] = table.column(leaf.indicator)

    to_normalize = [l for l in leaves if l.indicator in raw_cols]
    if to_normalize:
        raw_table = IndicatorTable(
            scenario_names,
            [l.indicator for l in to_normalize],
            np.column_stack([raw_cols[l.indicator] for l in to_normalize]),
        )
        normalized_part = normalize(raw_table, tree, ZERO_COLUMN_POLICY)
        for indicator in normalized_part.indicators:
            norm_cols[indicator] = normalized_part.column(indicator)

    missing = [l.indicator for l in leaves if l.indicator not in norm_cols]
    if missing:
        raise ConfigError(f"no values for hierarchy leaves {missing}")
    table = IndicatorTable(
        scenario_names,
        [l.indicator for l in leaves],
        np.column_stack([norm_cols[l.indicator] for l in leaves]),
        normalized=True,
    )
    return table, simulated_table


class _Stage:
    """Names the failing pipeline stage on any package error."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, LidscoreError) \
                and not getattr(exc, "_staged", False):
            exc._staged = True
            exc.args = (f"[stage: {self.name}] {exc}",)
            if isinstance(exc, ConfigError):
                exc.errors = [f"[stage: {self.name}] {e}" for e in exc.errors]
        return False


def run_pipeline(config: ProjectConfig, out_dir=None,
                 render: str | None = None) -> RunManifest:
    """Execute every stage the config asks for and persist the results.

    `render` additionally writes the summary tables in the given format
    ("markdown", "csv" or "json"). Errors abort the run and name the
    failing stage."""
    writer = _Writer(Path(out_dir) if out_dir else config.output_dir)
    with _Stage("weighting"):
        tree, consistency_reports = config.weight_tree()

    with _Stage("sizing"):
        sizing = compute_sizing(config)
    if sizing is not None:
        writer.write_json(sizing.to_dict(), "sizing.json")
        if sizing.atrcr_points is not None:
            rows = [[repr(h), repr(r)] for h, r in sorted(sizing.atrcr_points.items())]
            writer.write_rows(["depth_mm", "atrcr"], rows, "atrcr_curve.csv")

    weights_payload = {
        "tree": tree.to_dict(),
        "consistency": {
            node: {"lambda_max": r.lambda_max, "ci": r.ci, "ri": r.ri,
                   "cr": r.cr, "passed": r.passed}
            for node, r in sorted(consistency_reports.items())
        },
    }
    writer.write_json(weights_payload, "weights.json")

    with _Stage("design storms"):
        storms = build_storms(config)
    for name, storm in storms.items():
        rows = [
            [repr(k * storm.step_s / 60.0), repr(float(v))]
            for k, v in enumerate(storm.intensities_mm_hr)
        ]
        writer.write_rows(["t_min", "intensity_mm_per_hr"], rows,
                          "storms", f"storm_{name}.csv")

    needs_simulation = any(l.source == "simulated" for l in tree.leaves())
    runs = None
    if needs_simulation or not config.scenarios:
        with _Stage("simulation"):
            runs = simulate_all(config, storms)
        _persist_runs(writer, config, runs)

    ranking: list = []
    report = None
    table = None
    simulated_table = None
    if config.scenarios:
        with _Stage("indicator assembly"):
            table, simulated_table = assemble_indicators(config, tree, runs)
        if simulated_table is not None:
            p = writer.path("indicators", "simulated_environmental.csv")
            simulated_table.to_csv(p)
            writer.record(p)
        p = writer.path("indicators", "normalized.csv")
        table.to_csv(p)
        writer.record(p)
        with _Stage("benefit roll-up"):
            report = rollup(tree, table)
        ranking = list(report.ranking)
        p = writer.path("benefit_report.json")
        report.to_json(p)
        writer.record(p)
        top_nodes = [c.name for c in tree.root.children] + [tree.root.name]
        rows = [
            [name] + [repr(report.score(node, name)) for node in top_nodes]
            for name in report.scenarios
        ]
        writer.write_rows(["scenario"] + top_nodes, rows, "benefits.csv")
        writer.write_rows(
            ["rank", "scenario", "comprehensive"],
            [
                [str(i + 1), name, repr(report.score(tree.root.name, name))]
                for i, name in enumerate(report.ranking)
            ],
            "ranking.csv",
        )

    if render:
        from lidscore.report import render_tables

        render_tables(writer, config, tree, sizing, report,
                      simulated_table, table, render)

    compliance = {}
    if sizing is not None:
        compliance = {
            name: sizing.compliant(name) for name in sorted(sizing.capacities_m3)
        }

    manifest = RunManifest(
        config_hash=config.config_hash,
        package_version=lidscore.__version__,
        kernel_backend=kernels.BACKEND,
        created_utc=_dt.datetime.now(_dt.timezone.utc).isoformat(),
        storms=list(storms),
        ranking=ranking,
        compliance=compliance,
        files=writer.files,
        versions={"lidscore": lidscore.__version__, "numpy": np.__version__,
                  "python": platform.python_version()},
    )
    manifest.to_json(writer.path("manifest.json"))
    return manifest


def weight_sensitivity(config: ProjectConfig, node: str, delta: float) -> dict:
    """Perturb one hierarchy node weight by +/-delta (siblings renormalized)
    and report whether the top-ranked scenario changes."""
    tree, _ = config.weight_tree()
    runs = None
    if any(l.source == "simulated" for l in tree.leaves()):
        runs = simulate_all(config, build_storms(config))
    table, _ = assemble_indicators(config, tree, runs)
    base_report = rollup(tree, table)
    base_weight = tree.find(node).weight
    outcomes = {"node": node, "base_weight": base_weight,
                "base_ranking": list(base_report.ranking), "perturbations": {}}
    for sign in (+1.0, -1.0):
        w = base_weight + sign * delta
        if not 0.0 <= w <= 1.0:
            raise ValidationError(
                f"perturbed weight {w:.4f} for {node!r} outside [0, 1]"
            )
        perturbed = tree.reweighted(node, w)
        # leaf set is unchanged, so the same normalized table applies
        report = rollup(perturbed, table)
        outcomes["perturbations"][f"{sign * delta:+g}"] = {
            "weight": w,
            "ranking": list(report.ranking),
            "top_changed": report.ranking[0] != base_report.ranking[0],
        }
    return outcomes
