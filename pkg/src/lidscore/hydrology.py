"""Subcatchment rainfall-runoff simulation and translation routing.

Each subcatchment is an impervious and a pervious nonlinear reservoir
(Manning-type outflow, Horton infiltration on the pervious part) stepped
with explicit Euler; see lidscore.kernels for the inner loop. Conduits are
abstracted to pure translation lags, which preserves volumes and peak
timing, the only things the downstream indicators need.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from lidscore import kernels
from lidscore.errors import ConfigError, ValidationError
from lidscore.lid import LidSpec, M2_PER_HA, simulate_lid_unit
from lidscore.storms import Hyetograph

# Euler substep budget: one substep may move the ponded depth by at most
# this much. Small enough that event totals sit well inside 1% of a 1 s
# reference integration (the recession bias grows with coarser substeps).
MAX_SUBSTEP_DEPTH_MM = 0.01


@dataclass(frozen=True)
class HortonParams:
    """Infiltration capacity decay f(t) = fc + (f0 - fc) * exp(-k t)."""

    f0_mm_hr: float
    fc_mm_hr: float
    decay_per_hr: float

    def __post_init__(self):
        if not self.f0_mm_hr >= self.fc_mm_hr >= 0:
            raise ValidationError("need f0 >= fc >= 0")
        if self.decay_per_hr <= 0:
            raise ValidationError("decay constant must be positive")


def horton_rate(params: HortonParams, t_hr: float) -> float:
    """Infiltration capacity (mm/hr) after `t_hr` hours of wetting."""
    if t_hr < 0:
        raise ValidationError("time must be non-negative")
    return params.fc_mm_hr + (params.f0_mm_hr - params.fc_mm_hr) * math.exp(
        -params.decay_per_hr * t_hr
    )


@dataclass(frozen=True)
class LandUse:
    name: str
    runoff_coefficient: float
    area_ha: float
    surface_class: str = "other"

    def __post_init__(self):
        if not 0.0 <= self.runoff_coefficient <= 1.0:
            raise ValidationError(f"{self.name}: runoff coefficient outside [0, 1]")
        if self.area_ha <= 0:
            raise ValidationError(f"{self.name}: land-use area must be positive")


@dataclass
class Subcatchment:
    id: str
    area_ha: float
    impervious_fraction: float
    width_m: float
    slope: float
    horton: HortonParams
    land_uses: tuple = ()
    outlet: str = ""
    depression_storage_mm: dict = field(
        default_factory=lambda: {"impervious": 1.5, "pervious": 2.5}
    )
    manning_n: dict = field(
        default_factory=lambda: {"impervious": 0.012, "pervious": 0.15}
    )

    def __post_init__(self):
        if self.area_ha <= 0 or self.width_m <= 0 or self.slope <= 0:
            raise ValidationError(f"{self.id}: area, width and slope must be positive")
        if not 0.0 <= self.impervious_fraction <= 1.0:
            raise ValidationError(f"{self.id}: impervious fraction outside [0, 1]")
        for surface in ("impervious", "pervious"):
            if self.depression_storage_mm.get(surface, -1) < 0:
                raise ValidationError(
                    f"{self.id}: depression_storage_mm needs a non-negative "
                    f"{surface!r} entry"
                )
            if self.manning_n.get(surface, 0) <= 0:
                raise ValidationError(
                    f"{self.id}: manning_n needs a positive {surface!r} entry"
                )
        if self.land_uses:
            total = sum(lu.area_ha for lu in self.land_uses)
            if abs(total - self.area_ha) > 1e-3 * self.area_ha:
                raise ValidationError(
                    f"{self.id}: land-use areas sum to {total:.4f} ha, "
                    f"subcatchment is {self.area_ha} ha"
                )

    @property
    def area_m2(self) -> float:
        return self.area_ha * M2_PER_HA


@dataclass(frozen=True)
class Link:
    """Pure-translation conduit: shifts its inflow by `lag_s`."""

    id: str
    from_node: str
    to_node: str
    lag_s: float
    capacity_lps: float | None = None

    def __post_init__(self):
        if self.lag_s < 0:
            raise ValidationError(f"link {self.id}: negative lag")


@dataclass
class Hydrograph:
    site: str
    step_s: float
    flows_lps: np.ndarray

    def __post_init__(self):
        self.flows_lps = np.asarray(self.flows_lps, dtype=float)
        if not np.all(np.isfinite(self.flows_lps)):
            raise ValidationError(f"{self.site}: non-finite flow")
        if np.any(self.flows_lps < 0):
            raise ValidationError(f"{self.site}: negative flow")

    @property
    def volume_m3(self) -> float:
        return float(self.flows_lps.sum() * self.step_s / 1000.0)

    def to_csv(self, path) -> None:
        """Write `t_s,flow_Lps` rows (t at step start)."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t_s", "flow_Lps"])
            for k, q in enumerate(self.flows_lps):
                writer.writerow([repr(k * self.step_s), repr(float(q))])


def composite_runoff_coefficient(land_uses) -> float:
    """Area-weighted mean runoff coefficient of a land-use mix."""
    land_uses = list(land_uses)
    if not land_uses:
        raise ValidationError("no land uses given")
    total_area = sum(lu.area_ha for lu in land_uses)
    return sum(lu.runoff_coefficient * lu.area_ha for lu in land_uses) / total_area


def runoff_volume(psi: float, depth_mm: float, area_ha: float) -> float:
    """Event runoff volume W = 10 * psi * h * F (m3; h in mm, F in ha)."""
    if min(psi, depth_mm, area_ha) < 0:
        raise ValidationError("runoff-volume inputs must be non-negative")
    return 10.0 * psi * depth_mm * area_ha


@dataclass
class WaterBalance:
    """Event water balance of one subcatchment run (volumes in m3)."""

    rainfall_m3: float
    runoff_m3: float
    infiltration_m3: float
    surface_storage_m3: float
    lid_captured_m3: float
    evaporation_m3: float = 0.0

    def closure_error(self) -> float:
        if self.rainfall_m3 == 0.0:
            return 0.0
        out = (self.runoff_m3 + self.infiltration_m3 + self.surface_storage_m3
               + self.lid_captured_m3 + self.evaporation_m3)
        return abs(self.rainfall_m3 - out) / self.rainfall_m3


def resample_intensities(storm: Hyetograph, dt_s: float) -> np.ndarray:
    """Storm intensities (mm/hr) on a `dt_s` grid.

    The storm step must divide the simulation step or vice versa; mass is
    preserved either way.
    """
    src = float(storm.step_s)
    if abs(src - dt_s) < 1e-9:
        return np.asarray(storm.intensities_mm_hr, dtype=float)
    if src > dt_s:
        ratio = src / dt_s
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValidationError(
                f"simulation step {dt_s} s does not divide storm step {src} s"
            )
        return np.repeat(storm.intensities_mm_hr, int(round(ratio)))
    ratio = dt_s / src
    if abs(ratio - round(ratio)) > 1e-9:
        raise ValidationError(
            f"storm step {src} s does not divide simulation step {dt_s} s"
        )
    r = int(round(ratio))
    return np.asarray(storm.intensities_mm_hr, dtype=float).reshape(-1, r).mean(axis=1)


def _manning_coefficient(sc: Subcatchment, area_m2: float, surface: str) -> float:
    # q [mm/s] = coef * (depth_mm - dstore_mm)^(5/3); derived from the SWMM
    # per-unit-area form q = W * sqrt(S) / (A * n) * d^(5/3) with d in m.
    if area_m2 <= 0:
        return 0.0
    n = sc.manning_n[surface]
    return sc.width_m * math.sqrt(sc.slope) / (area_m2 * n) * 1000.0 ** (-2.0 / 3.0)


@dataclass
class SubcatchmentDetail:
    """Per-step internals of one subcatchment run, for quality coupling."""

    pre_lid_runoff_m3: np.ndarray
    lid_results: list


def simulate_subcatchment(sc: Subcatchment, storm: Hyetograph,
                          placements=(), catalog: dict | None = None, *,
                          sim_step_s: float | None = None,
                          tail_min: float = 0.0):
    """Run one subcatchment through one storm.

    Returns (Hydrograph at the subcatchment outlet, WaterBalance,
    SubcatchmentDetail). LID placements intercept their
    `treated_fraction` of the runoff generated on the remaining area plus
    the rain falling on the facility itself.
    """
    dt = float(sim_step_s if sim_step_s is not None else storm.step_s)
    intensity_mm_hr = resample_intensities(storm, dt)
    if tail_min:
        intensity_mm_hr = np.concatenate(
            [intensity_mm_hr, np.zeros(int(round(tail_min * 60.0 / dt)))]
        )
    n = intensity_mm_hr.size
    intensity_mmps = intensity_mm_hr / 3600.0

    placements = list(placements)
    lid_area_m2 = sum(p.area_m2 for p in placements)
    if lid_area_m2 > sc.area_m2 + 1e-9:
        raise ConfigError(
            f"{sc.id}: LID area {lid_area_m2 / M2_PER_HA:.3f} ha exceeds "
            f"subcatchment area {sc.area_ha} ha"
        )
    treated_total = sum(p.treated_fraction for p in placements)
    if treated_total > 1.0 + 1e-9:
        raise ConfigError(
            f"{sc.id}: treated fractions sum to {treated_total:.3f} (> 1)"
        )
    if placements and catalog is None:
        raise ConfigError(f"{sc.id}: placements given without a LID catalog")

    area_rest = sc.area_m2 - lid_area_m2
    area_imp = area_rest * sc.impervious_fraction
    area_perv = area_rest - area_imp

    t_mid_hr = (np.arange(n) + 0.5) * dt / 3600.0
    fcap_mmps = np.array(
        [horton_rate(sc.horton, t) for t in t_mid_hr]) / 3600.0
    zeros = np.zeros(n)

    runoff_m3 = np.zeros(n)
    infiltration_m3 = 0.0
    ponded_m3 = 0.0
    for area, fcap, surface in (
        (area_imp, zeros, "impervious"),
        (area_perv, fcap_mmps, "pervious"),
    ):
        if area <= 0.0:
            continue
        coef = _manning_coefficient(sc, area, surface)
        r_mm, f_mm, d_end = kernels.step_subarea(
            intensity_mmps, fcap, coef, sc.depression_storage_mm[surface],
            dt, MAX_SUBSTEP_DEPTH_MM, 0.0,
        )
        runoff_m3 += r_mm * area / 1000.0
        infiltration_m3 += float(f_mm.sum()) * area / 1000.0
        ponded_m3 += d_end * area / 1000.0

    outlet_m3 = runoff_m3 * (1.0 - treated_total)
    lid_results = []
    lid_captured_m3 = 0.0
    for p in placements:
        spec: LidSpec = catalog[p.kind]
        result = simulate_lid_unit(
            spec, p.area_m2, runoff_m3 * p.treated_fraction, intensity_mm_hr, dt
        )
        lid_results.append(result)
        outlet_m3 = outlet_m3 + result.outflow_m3
        lid_captured_m3 += result.captured_m3

    flows_lps = outlet_m3 / dt * 1000.0
    hydrograph = Hydrograph(site=sc.id, step_s=dt, flows_lps=flows_lps)
    rainfall_m3 = float(intensity_mm_hr.sum()) * dt / 3600.0 * sc.area_m2 / 1000.0
    balance = WaterBalance(
        rainfall_m3=rainfall_m3,
        runoff_m3=float(outlet_m3.sum()),
        infiltration_m3=infiltration_m3,
        surface_storage_m3=ponded_m3,
        lid_captured_m3=lid_captured_m3,
    )
    detail = SubcatchmentDetail(pre_lid_runoff_m3=runoff_m3, lid_results=lid_results)
    return hydrograph, balance, detail


def _downstream_paths(links) -> dict:
    """Map each node to (terminal node, accumulated lag); reject cycles
    and nodes with more than one outgoing link."""
    outgoing: dict = {}
    for link in links:
        if link.from_node in outgoing:
            raise ValidationError(
                f"node {link.from_node} has more than one outgoing link"
            )
        outgoing[link.from_node] = link
    paths: dict = {}
    for start in list(outgoing) + [l.to_node for l in links]:
        node = start
        lag = 0.0
        visited = [node]
        while node in outgoing:
            link = outgoing[node]
            lag += link.lag_s
            node = link.to_node
            if node in visited:
                cycle = " -> ".join(visited[visited.index(node):] + [node])
                raise ValidationError(f"link network contains a cycle: {cycle}")
            visited.append(node)
        paths[start] = (node, lag)
    return paths


def _shift(series: np.ndarray, steps: int, length: int) -> np.ndarray:
    out = np.zeros(length)
    out[steps:steps + series.size] = series
    return out


def route(inflows: dict, links) -> dict:
    """Translate subcatchment hydrographs to the outfalls.

    `inflows` maps node ids to Hydrographs; every inflow node must reach a
    terminal node (an outfall) through the acyclic link network. Returns
    one summed Hydrograph per outfall. Volume is conserved exactly.
    """
    if not inflows:
        return {}
    steps = {h.step_s for h in inflows.values()}
    if len(steps) != 1:
        raise ValidationError("inflow hydrographs have mixed steps")
    dt = steps.pop()
    paths = _downstream_paths(links)
    plan = []  # (outfall, shift steps, flows)
    for node, hydro in inflows.items():
        outfall, lag = paths.get(node, (node, 0.0))
        plan.append((outfall, int(round(lag / dt)), hydro.flows_lps))
    length = max(shift + flows.size for _, shift, flows in plan)
    accum: dict = {}
    for outfall, shift, flows in plan:
        base = accum.setdefault(outfall, np.zeros(length))
        base += _shift(flows, shift, length)
    return {
        outfall: Hydrograph(site=outfall, step_s=dt, flows_lps=flows)
        for outfall, flows in sorted(accum.items())
    }


def route_series(inflows: dict, links, step_s: float) -> dict:
    """Route bare per-step series (e.g. pollutant loads) like `route`."""
    if not inflows:
        return {}
    paths = _downstream_paths(links)
    plan = []
    for node, series in inflows.items():
        outfall, lag = paths.get(node, (node, 0.0))
        plan.append((outfall, int(round(lag / step_s)), np.asarray(series, dtype=float)))
    length = max(shift + series.size for _, shift, series in plan)
    accum: dict = {}
    for outfall, shift, series in plan:
        base = accum.setdefault(outfall, np.zeros(length))
        base += _shift(series, shift, length)
    return dict(sorted(accum.items()))
