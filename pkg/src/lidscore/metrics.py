"""Goodness-of-fit and event statistics for simulated series."""

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from lidscore.errors import ValidationError


@dataclass(frozen=True)
class FitReport:
    nse: float
    n_points: int

    @property
    def passed(self) -> bool:
        return self.nse > 0.5


def nse(observed, simulated, *, observed_step_s=None, simulated_step_s=None) -> FitReport:
    """Nash-Sutcliffe efficiency of `simulated` against `observed`.

    NSE = 1 - sum((O - S)^2) / sum((O - mean(O))^2); 1.0 for identical
    series, 0.0 when the simulation is no better than the observed mean.
    When both step sizes are given and differ, the simulated series is
    linearly interpolated onto the observed timestamps.
    """
    obs = np.asarray(observed, dtype=float)
    sim = np.asarray(simulated, dtype=float)
    if observed_step_s and simulated_step_s and observed_step_s != simulated_step_s:
        t_obs = np.arange(obs.size) * float(observed_step_s)
        t_sim = np.arange(sim.size) * float(simulated_step_s)
        sim = np.interp(t_obs, t_sim, sim)
    if obs.size != sim.size:
        raise ValidationError("observed and simulated series differ in length")
    if obs.size < 2:
        raise ValidationError("need at least 2 points")
    denom = float(np.sum((obs - obs.mean()) ** 2))
    if denom == 0.0:
        raise ValidationError("zero variance in observed series")
    value = 1.0 - float(np.sum((obs - sim) ** 2)) / denom
    return FitReport(nse=value, n_points=int(obs.size))


def read_observed_csv(path):
    """Read a measured series: `t_s,value` rows with a header.

    Returns (times_s, values) arrays; timestamps must increase. One file
    per site and parameter (flow, TSS, COD, ...).
    """
    times = []
    values = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "t_s" not in reader.fieldnames \
                or "value" not in reader.fieldnames:
            raise ValidationError(f"{path}: expected header 't_s,value'")
        for row in reader:
            times.append(float(row["t_s"]))
            values.append(float(row["value"]))
    t = np.asarray(times)
    if t.size and np.any(np.diff(t) <= 0):
        raise ValidationError(f"{path}: timestamps must be strictly increasing")
    return t, np.asarray(values)


def peak_stats(hydrograph):
    """Peak flow (L/s) and its time (s). Ties break to the earliest step."""
    flows = np.asarray(hydrograph.flows_lps, dtype=float)
    if flows.size == 0:
        raise ValidationError("empty hydrograph")
    idx = int(np.argmax(flows))
    return float(flows[idx]), idx * float(hydrograph.step_s)


def reduction(base: float, scenario: float) -> float:
    """Percent reduction of `scenario` relative to `base` (may be negative)."""
    if base <= 0:
        raise ValidationError("baseline value must be positive")
    pct = (base - scenario) / base * 100.0
    if pct < 0:
        warnings.warn(f"scenario value {scenario} exceeds baseline {base}", stacklevel=2)
    return pct
