"""Project configuration: a single YAML file describing the catchment,
pollutants, LID catalog, scenarios, storm settings, sizing inputs and the
indicator hierarchy. See docs/config.md for the schema.

Validation is eager and batched: every problem found is reported with its
section path in one ConfigError.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from lidscore import ahp
from lidscore.errors import ConfigError, LidscoreError, ValidationError
from lidscore.evaluator import TreeNode, WeightTree
from lidscore.hydrology import (HortonParams, LandUse, Link, Subcatchment,
                                _downstream_paths)
from lidscore.lid import (LidKind, LidLayers, LidPlacement, LidSpec, Scenario,
                          default_catalog)
from lidscore.quality import DEFAULT_ANTECEDENT_DRY_DAYS, PollutantSpec
from lidscore.storms import DEFAULT_MIN_EVENT_MM, IdfParams

SCHEMA_VERSION = 1

DEFAULT_HORTON = {"f0_mm_hr": 76.2, "fc_mm_hr": 3.81, "decay_per_hr": 4.14}


@dataclass(frozen=True)
class StormSettings:
    depths_mm: tuple
    duration_min: float
    peak_ratio: float
    step_s: float
    idf: IdfParams
    tail_min: float = 60.0


@dataclass(frozen=True)
class SizingTarget:
    depth_mm: float | None = None
    atrcr: float | None = None
    rainfall_csv: Path | None = None


@dataclass(frozen=True)
class SizingSettings:
    existing_facilities: tuple
    target: SizingTarget
    min_event_mm: float = DEFAULT_MIN_EVENT_MM
    psi: float | None = None        # overrides the land-use composite
    area_ha: float | None = None    # overrides the summed subcatchment area

    @property
    def existing_total_m3(self) -> float:
        return sum(v for _, v in self.existing_facilities)


@dataclass(frozen=True)
class DirectTable:
    path: Path
    normalized: bool


@dataclass
class ProjectConfig:
    path: Path
    config_hash: str
    name: str
    output_dir: Path
    subcatchments: dict
    links: list
    outfalls: list
    pollutants: list
    antecedent_dry_days: float
    catalog: dict
    scenarios: list
    storms: StormSettings
    sizing: SizingSettings | None
    hierarchy_spec: dict
    matrices: dict = field(default_factory=dict)
    direct_tables: list = field(default_factory=list)

    def weight_tree(self):
        """Resolve the hierarchy to a WeightTree, deriving weights from
        pairwise matrices wherever explicit weights are missing. Returns
        (tree, {node: ConsistencyReport})."""
        reports: dict = {}

        def build(spec: dict, weight: float) -> TreeNode:
            children_spec = spec.get("children") or []
            if not children_spec:
                return TreeNode.leaf_from_dict(spec, weight)
            if all("weight" in c for c in children_spec):
                weights = [float(c["weight"]) for c in children_spec]
            elif len(children_spec) == 1:
                weights = [1.0]
            else:
                name = spec["name"]
                matrix = self.matrices.get(name)
                if matrix is None:
                    raise ConfigError(
                        f"hierarchy.{name}: children need weights or a pairwise matrix"
                    )
                expected = tuple(c["name"] for c in children_spec)
                if matrix.labels != expected:
                    raise ConfigError(
                        f"matrices.{name}: labels {matrix.labels} do not match "
                        f"children {expected}"
                    )
                report = ahp.consistency(matrix)
                reports[name] = report
                if not report.passed:
                    raise ConfigError(
                        f"matrices.{name}: CR = {report.cr:.4f} >= {ahp.CR_LIMIT}"
                    )
                weights = list(ahp.derive_weights(matrix).weights)
            children = tuple(
                build(child, float(w)) for child, w in zip(children_spec, weights)
            )
            return TreeNode(name=spec["name"], weight=weight, children=children)

        try:
            tree = WeightTree(build(self.hierarchy_spec, 1.0))
        except ValidationError as exc:
            raise ConfigError(f"hierarchy: {exc}") from exc
        return tree, reports

class _Collector:
    def __init__(self):
        self.errors = []

    def add(self, section: str, message) -> None:
        self.errors.append(f"{section}: {message}")

    def guard(self, section: str, fn, *args, **kwargs):
        """Run a constructor, converting its ValidationError into a batch
        entry; returns None on failure."""
        try:
            return fn(*args, **kwargs)
        except (ValidationError, ConfigError, KeyError, TypeError) as exc:
            self.add(section, exc)
            return None


def load_config(path) -> ProjectConfig:
    """Parse and fully validate a project file. Raises ConfigError listing
    every problem found."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    raw_bytes = path.read_bytes()
    try:
        raw = yaml.safe_load(raw_bytes)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")

    errors = _Collector()
    base_dir = path.parent

    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        errors.add("schema_version", f"expected {SCHEMA_VERSION}, got {version!r}")

    name = raw.get("name", path.stem)
    output_dir = base_dir / raw.get("output_dir", "results")

    # --- catchment ------------------------------------------------------
    subcatchments: dict = {}
    links: list = []
    outfalls: list = []
    catchment = raw.get("catchment") or {}
    for i, sub in enumerate(catchment.get("subcatchments") or []):
        section = f"catchment.subcatchments[{sub.get('id', i)}]"
        land_uses = []
        for lu in sub.get("land_uses") or []:
            parsed = errors.guard(
                section + ".land_uses", LandUse,
                name=lu.get("name", "?"),
                runoff_coefficient=lu.get("runoff_coefficient", -1),
                area_ha=lu.get("area_ha", 0),
                surface_class=lu.get("surface_class", "other"),
            )
            if parsed:
                land_uses.append(parsed)
        horton_raw = {**DEFAULT_HORTON, **(sub.get("horton") or {})}
        horton = errors.guard(section + ".horton", HortonParams, **horton_raw)
        if horton is None:
            continue
        kwargs = {}
        for opt in ("depression_storage_mm", "manning_n"):
            if opt in sub:
                kwargs[opt] = dict(sub[opt])
        sc = errors.guard(
            section, Subcatchment,
            id=str(sub.get("id", f"sub{i}")),
            area_ha=sub.get("area_ha", 0),
            impervious_fraction=sub.get("impervious_fraction", 0),
            width_m=sub.get("width_m", 0),
            slope=sub.get("slope", 0),
            horton=horton,
            land_uses=tuple(land_uses),
            outlet=str(sub.get("outlet", "")),
            **kwargs,
        )
        if sc:
            if sc.id in subcatchments:
                errors.add(section, f"duplicate subcatchment id {sc.id!r}")
            subcatchments[sc.id] = sc
    for i, ln in enumerate(catchment.get("links") or []):
        section = f"catchment.links[{ln.get('id', i)}]"
        link = errors.guard(
            section, Link,
            id=str(ln.get("id", f"link{i}")),
            from_node=str(ln.get("from", "")),
            to_node=str(ln.get("to", "")),
            lag_s=ln.get("lag_s", 0),
            capacity_lps=ln.get("capacity_lps"),
        )
        if link:
            links.append(link)
    outfalls = [str(o) for o in catchment.get("outfalls") or []]

    # network integrity: outlets reach declared outfalls, no cycles
    if subcatchments:
        try:
            paths = _downstream_paths(links)
            for sc in subcatchments.values():
                if not sc.outlet:
                    errors.add(f"catchment.subcatchments[{sc.id}]", "missing outlet")
                    continue
                terminal, _ = paths.get(sc.outlet, (sc.outlet, 0.0))
                if outfalls and terminal not in outfalls:
                    errors.add(
                        f"catchment.subcatchments[{sc.id}]",
                        f"outlet {sc.outlet!r} drains to {terminal!r}, "
                        f"which is not a declared outfall",
                    )
        except ValidationError as exc:
            errors.add("catchment.links", exc)

    # --- pollutants ------------------------------------------------------
    pollutants = []
    for i, p in enumerate(raw.get("pollutants") or []):
        section = f"pollutants[{p.get('name', i)}]"
        spec = errors.guard(
            section, PollutantSpec,
            name=str(p.get("name", f"pollutant{i}")),
            buildup_max_kg_ha=p.get("buildup_max_kg_ha", 0),
            half_saturation_days=p.get("half_saturation_days", 0),
            washoff_coeff=p.get("washoff_coeff", 0),
            washoff_exponent=p.get("washoff_exponent", 1.0),
            lid_removal=dict(p.get("lid_removal") or {}),
            surface_class_factors=dict(p.get("surface_class_factors") or {}),
        )
        if spec:
            pollutants.append(spec)
    antecedent = float(raw.get("antecedent_dry_days", DEFAULT_ANTECEDENT_DRY_DAYS))

    # --- LID catalog ------------------------------------------------------
    catalog = default_catalog()
    for key, entry in (raw.get("lid_catalog") or {}).items():
        section = f"lid_catalog.{key}"
        kind = errors.guard(section, LidKind.parse, key)
        if kind is None:
            continue
        base = catalog[kind]
        layers = base.layers
        if "layers" in entry:
            layers = errors.guard(section + ".layers", LidLayers, **entry["layers"])
            if layers is None:
                continue
        spec = errors.guard(
            section, LidSpec,
            kind=kind,
            unit_capacity_m3_m2=entry.get("unit_capacity_m3_m2",
                                          base.unit_capacity_m3_m2),
            layers=layers,
            favorability=dict(entry.get("favorability") or base.favorability),
            unit_cost_weight=entry.get("unit_cost_weight", base.unit_cost_weight),
        )
        if spec:
            catalog[kind] = spec

    # --- scenarios ------------------------------------------------------
    scenarios = []
    seen_names = set()
    for i, sc_raw in enumerate(raw.get("scenarios") or []):
        sc_name = str(sc_raw.get("name", f"scenario{i}"))
        section = f"scenarios[{sc_name}]"
        if sc_name in seen_names:
            errors.add(section, "duplicate scenario name")
        seen_names.add(sc_name)
        placements = []
        for j, pl in enumerate(sc_raw.get("placements") or []):
            psec = f"{section}.placements[{j}]"
            kind = errors.guard(psec, LidKind.parse, pl.get("kind"))
            if kind is None:
                continue
            host_id = str(pl.get("subcatchment", ""))
            host = subcatchments.get(host_id)
            if host is None:
                errors.add(psec, f"unknown subcatchment {host_id!r}")
                continue
            treated = pl.get("treated_fraction")
            if treated is None:
                treated = host.impervious_fraction
            placement = errors.guard(
                psec, LidPlacement,
                subcatchment=host_id, kind=kind,
                area_ha=pl.get("area_ha", 0),
                treated_fraction=treated,
            )
            if placement:
                placements.append(placement)
        scenario = Scenario(name=sc_name, placements=tuple(placements))
        scenarios.append(scenario)
        # per-host constraints
        by_host: dict = {}
        for p in placements:
            by_host.setdefault(p.subcatchment, []).append(p)
        for host_id, host_placements in by_host.items():
            host = subcatchments[host_id]
            area = sum(p.area_ha for p in host_placements)
            if area > host.area_ha + 1e-9:
                errors.add(
                    section,
                    f"LID area {area:.3f} ha exceeds subcatchment "
                    f"{host_id} area {host.area_ha} ha",
                )
            treated = sum(p.treated_fraction for p in host_placements)
            if treated > 1.0 + 1e-9:
                errors.add(
                    section,
                    f"treated fractions in {host_id} sum to {treated:.3f} (> 1)",
                )

    # --- storms ------------------------------------------------------
    storms_raw = raw.get("storms") or {}
    idf_raw = storms_raw.get("idf")
    storms = None
    if idf_raw is None:
        errors.add("storms.idf", "IDF constants are required (a, b_min, n)")
    else:
        idf = errors.guard("storms.idf", IdfParams,
                           a=idf_raw.get("a", 0), b_min=idf_raw.get("b_min", 0),
                           n=idf_raw.get("n", 1))
        if idf:
            depths = tuple(float(d) for d in storms_raw.get("depths_mm") or ())
            if not depths:
                errors.add("storms.depths_mm", "at least one storm depth required")
            storms = StormSettings(
                depths_mm=depths,
                duration_min=float(storms_raw.get("duration_min", 90)),
                peak_ratio=float(storms_raw.get("peak_ratio", 0.5)),
                step_s=float(storms_raw.get("step_s", 60)),
                idf=idf,
                tail_min=float(storms_raw.get("tail_min", 60)),
            )

    # --- sizing ------------------------------------------------------
    sizing = None
    sizing_raw = raw.get("sizing")
    if sizing_raw:
        facilities = tuple(
            (str(f.get("label", f"facility{i}")), float(f.get("volume_m3", 0)))
            for i, f in enumerate(sizing_raw.get("existing_facilities") or [])
        )
        for label, volume in facilities:
            if volume < 0:
                errors.add("sizing.existing_facilities",
                           f"{label}: negative volume")
        target_raw = sizing_raw.get("target") or {}
        csv_path = target_raw.get("rainfall_csv")
        target = SizingTarget(
            depth_mm=target_raw.get("depth_mm"),
            atrcr=target_raw.get("atrcr"),
            rainfall_csv=base_dir / csv_path if csv_path else None,
        )
        if target.depth_mm is None and target.atrcr is None:
            errors.add("sizing.target", "need either depth_mm or atrcr")
        if target.atrcr is not None:
            if target.rainfall_csv is None:
                errors.add("sizing.target", "atrcr target needs rainfall_csv")
            elif not target.rainfall_csv.exists():
                errors.add("sizing.target",
                           f"rainfall file not found: {target.rainfall_csv}")
        psi_override = sizing_raw.get("psi")
        area_override = sizing_raw.get("area_ha")
        sizing = SizingSettings(
            existing_facilities=facilities,
            target=target,
            min_event_mm=float(sizing_raw.get("min_event_mm", DEFAULT_MIN_EVENT_MM)),
            psi=float(psi_override) if psi_override is not None else None,
            area_ha=float(area_override) if area_override is not None else None,
        )

    # --- hierarchy and matrices ------------------------------------------
    hierarchy = raw.get("hierarchy")
    if not hierarchy:
        errors.add("hierarchy", "missing indicator hierarchy")
        hierarchy = {"name": "comprehensive", "children": []}
    matrices: dict = {}
    for node, m_raw in (raw.get("matrices") or {}).items():
        section = f"matrices.{node}"
        if "csv" in m_raw:
            matrices[node] = errors.guard(
                section, ahp.PairwiseMatrix.from_csv, base_dir / m_raw["csv"]
            )
        else:
            matrices[node] = errors.guard(
                section, ahp.PairwiseMatrix.from_rows,
                tuple(m_raw.get("labels") or ()), m_raw.get("rows") or [],
            )
    matrices = {k: v for k, v in matrices.items() if v is not None}

    direct_tables = []
    for i, entry in enumerate(raw.get("direct_tables") or []):
        section = f"direct_tables[{i}]"
        file_name = entry.get("file")
        if not file_name:
            errors.add(section, "missing file")
            continue
        table_path = base_dir / file_name
        if not table_path.exists():
            errors.add(section, f"file not found: {table_path}")
            continue
        direct_tables.append(
            DirectTable(path=table_path, normalized=bool(entry.get("normalized")))
        )

    if errors.errors:
        raise ConfigError(errors.errors)

    config = ProjectConfig(
        path=path,
        config_hash=hashlib.sha256(raw_bytes).hexdigest(),
        name=str(name),
        output_dir=output_dir,
        subcatchments=subcatchments,
        links=links,
        outfalls=outfalls,
        pollutants=pollutants,
        antecedent_dry_days=antecedent,
        catalog=catalog,
        scenarios=scenarios,
        storms=storms,
        sizing=sizing,
        hierarchy_spec=hierarchy,
        matrices=matrices,
        direct_tables=direct_tables,
    )
    # resolving the tree exercises weight/matrix/CR validation eagerly
    try:
        config.weight_tree()
    except (ConfigError, LidscoreError) as exc:
        raise ConfigError([str(exc)]) from exc
    return config


def validate_config(path) -> ProjectConfig:
    """Alias of load_config; kept for CLI symmetry."""
    return load_config(path)
