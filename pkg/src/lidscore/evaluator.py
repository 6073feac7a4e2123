"""Indicator normalization, hierarchical benefit roll-up and ranking.

Raw indicator values are made dimensionless column by column
(I_km = X_km / sum_m X_km, so each column sums to 1 across scenarios),
then weighted up the indicator hierarchy; the root score is the
comprehensive benefit used for ranking.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from lidscore.errors import ValidationError
from lidscore.hydrology import Hydrograph
from lidscore.metrics import peak_stats

POLARITIES = ("benefit", "cost")
SOURCES = ("simulated", "facility_derived", "direct")
TRANSFORMS = ("encoded", "reciprocal")


@dataclass(frozen=True)
class TreeNode:
    name: str
    weight: float
    children: tuple = ()
    indicator: str | None = None
    polarity: str = "benefit"
    source: str = "simulated"
    transform: str = "encoded"

    def __post_init__(self):
        if self.weight < 0:
            raise ValidationError(f"node {self.name}: negative weight")
        if self.children and self.indicator:
            raise ValidationError(f"node {self.name}: both children and indicator")
        if not self.children:
            if not self.indicator:
                raise ValidationError(f"leaf {self.name}: missing indicator binding")
            if self.polarity not in POLARITIES:
                raise ValidationError(f"leaf {self.name}: bad polarity {self.polarity}")
            if self.source not in SOURCES:
                raise ValidationError(f"leaf {self.name}: bad source {self.source}")
            if self.transform not in TRANSFORMS:
                raise ValidationError(f"leaf {self.name}: bad transform {self.transform}")
        else:
            child_sum = sum(c.weight for c in self.children)
            if abs(child_sum - 1.0) > 1e-6:
                raise ValidationError(
                    f"node {self.name}: child weights sum to {child_sum}, not 1"
                )

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @classmethod
    def leaf_from_dict(cls, spec: dict, weight: float) -> "TreeNode":
        return cls(
            name=spec["name"],
            weight=weight,
            indicator=spec.get("indicator", spec["name"]),
            polarity=spec.get("polarity", "benefit"),
            source=spec.get("source", "simulated"),
            transform=spec.get("transform", "encoded"),
        )

    @classmethod
    def from_dict(cls, spec: dict, weight: float = 1.0) -> "TreeNode":
        children_spec = spec.get("children") or []
        if not children_spec:
            return cls.leaf_from_dict(spec, weight)
        children = tuple(
            cls.from_dict(child, float(child.get("weight", 1.0)))
            for child in children_spec
        )
        return cls(name=spec["name"], weight=weight, children=children)


@dataclass(frozen=True)
class WeightTree:
    root: TreeNode

    def __post_init__(self):
        if abs(self.root.weight - 1.0) > 1e-9:
            raise ValidationError("root weight must be 1")
        seen = set()
        for leaf in self.leaves():
            if leaf.indicator in seen:
                raise ValidationError(f"duplicate leaf indicator {leaf.indicator!r}")
            seen.add(leaf.indicator)

    def leaves(self):
        def walk(node):
            if node.is_leaf:
                yield node
            for child in node.children:
                yield from walk(child)

        yield from walk(self.root)

    def nodes(self):
        def walk(node):
            yield node
            for child in node.children:
                yield from walk(child)

        yield from walk(self.root)

    def find(self, name: str) -> TreeNode:
        for node in self.nodes():
            if node.name == name:
                return node
        raise ValidationError(f"no node named {name!r}")

    def reweighted(self, name: str, new_weight: float) -> "WeightTree":
        """Copy of the tree with one node's weight changed and its siblings
        rescaled so they still sum to 1."""
        if not 0.0 <= new_weight <= 1.0:
            raise ValidationError(f"new weight {new_weight} outside [0, 1]")

        def walk(node: TreeNode) -> TreeNode:
            if any(c.name == name for c in node.children):
                others = sum(c.weight for c in node.children if c.name != name)
                if others == 0 and new_weight != 1.0:
                    raise ValidationError(
                        f"cannot rebalance around {name!r}: no sibling weight"
                    )
                rebuilt = []
                for c in node.children:
                    if c.name == name:
                        rebuilt.append(replace(c, weight=new_weight))
                    else:
                        scale = (1.0 - new_weight) / others
                        if c.weight * scale < 0:
                            raise ValidationError("negative sibling weight")
                        rebuilt.append(replace(c, weight=c.weight * scale))
                return replace(node, children=tuple(rebuilt))
            return replace(node, children=tuple(walk(c) for c in node.children))

        if name == self.root.name:
            raise ValidationError("cannot perturb the root weight")
        self.find(name)  # raises if absent
        return WeightTree(walk(self.root))

    def to_dict(self) -> dict:
        def dump(node: TreeNode) -> dict:
            out = {"name": node.name, "weight": node.weight}
            if node.is_leaf:
                out.update(indicator=node.indicator, polarity=node.polarity,
                           source=node.source, transform=node.transform)
            else:
                out["children"] = [dump(c) for c in node.children]
            return out

        return dump(self.root)


@dataclass
class IndicatorTable:
    """Scenario-by-indicator value matrix (scenarios are rows)."""

    scenarios: list
    indicators: list
    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not self.scenarios:
            raise ValidationError("indicator table needs at least one scenario")
        if self.values.shape != (len(self.scenarios), len(self.indicators)):
            raise ValidationError(
                f"value matrix {self.values.shape} does not match "
                f"{len(self.scenarios)} scenarios x {len(self.indicators)} indicators"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("indicator values must be finite")

    def column(self, indicator: str) -> np.ndarray:
        try:
            j = self.indicators.index(indicator)
        except ValueError:
            raise ValidationError(f"no indicator column {indicator!r}") from None
        return self.values[:, j]

    def merged_with(self, other: "IndicatorTable") -> "IndicatorTable":
        if other.scenarios != self.scenarios:
            raise ValidationError("cannot merge tables with different scenarios")
        if self.normalized != other.normalized:
            raise ValidationError("cannot merge normalized with raw tables")
        return IndicatorTable(
            scenarios=list(self.scenarios),
            indicators=list(self.indicators) + list(other.indicators),
            values=np.hstack([self.values, other.values]),
            normalized=self.normalized,
        )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["scenario"] + list(self.indicators))
            for name, row in zip(self.scenarios, self.values):
                writer.writerow([name] + [repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path, normalized: bool = False) -> "IndicatorTable":
        with open(path, newline="") as fh:
            rows = [row for row in csv.reader(fh) if row]
        if not rows or rows[0][0] != "scenario":
            raise ValidationError(f"{path}: expected a 'scenario' header column")
        indicators = rows[0][1:]
        scenarios = [row[0] for row in rows[1:]]
        values = np.array([[float(v) for v in row[1:]] for row in rows[1:]])
        return cls(scenarios, indicators, values, normalized=normalized)


def normalize(table: IndicatorTable, tree: WeightTree | None = None,
              zero_policy: dict | None = None) -> IndicatorTable:
    """Column-wise linear normalization I = X / sum(X).

    Cost-polarity leaves with the `reciprocal` transform are inverted
    before normalizing (favorability-encoded columns are used as-is).
    Facility-derived columns arrive already reciprocal-encoded, so the
    transform is not applied twice. A column of zeros is an error unless
    its `zero_policy` is "uniform", in which case every scenario gets 1/M
    with a warning.
    """
    if table.normalized:
        return table
    zero_policy = zero_policy or {}
    leaf_by_indicator = {}
    if tree is not None:
        leaf_by_indicator = {leaf.indicator: leaf for leaf in tree.leaves()}
    m = len(table.scenarios)
    out = np.empty_like(table.values)
    for j, indicator in enumerate(table.indicators):
        column = table.values[:, j].astype(float)
        leaf = leaf_by_indicator.get(indicator)
        if (leaf is not None and leaf.polarity == "cost"
                and leaf.transform == "reciprocal"
                and leaf.source != "facility_derived"):
            if np.any(column <= 0):
                raise ValidationError(
                    f"indicator {indicator!r}: reciprocal transform needs positive values"
                )
            column = 1.0 / column
        total = column.sum()
        if total == 0.0:
            if zero_policy.get(indicator) == "uniform":
                warnings.warn(
                    f"indicator {indicator!r} is zero everywhere; using uniform shares",
                    stacklevel=2,
                )
                out[:, j] = 1.0 / m
                continue
            raise ValidationError(f"indicator {indicator!r} sums to zero")
        if total < 0:
            raise ValidationError(f"indicator {indicator!r} has a negative column sum")
        if np.any(column < 0):
            warnings.warn(f"indicator {indicator!r} has negative entries", stacklevel=2)
        out[:, j] = column / total
    return IndicatorTable(list(table.scenarios), list(table.indicators), out,
                          normalized=True)


@dataclass
class BenefitReport:
    """Node scores per scenario, the normalized leaves and the ranking."""

    scenarios: list
    node_scores: dict            # node name -> np.ndarray over scenarios
    leaf_values: IndicatorTable  # normalized leaf columns actually used
    root_name: str
    ranking: list = field(default_factory=list)
    tied: bool = False

    def __post_init__(self):
        for j, indicator in enumerate(self.leaf_values.indicators):
            total = float(self.leaf_values.values[:, j].sum())
            if abs(total - 1.0) > 5e-3:
                raise ValidationError(
                    f"normalized column {indicator!r} sums to {total:.4f}"
                )
        if not self.ranking:
            self.ranking, self.tied = rank_scenarios(
                self.scenarios, self.node_scores[self.root_name]
            )

    def score(self, node: str, scenario: str) -> float:
        return float(self.node_scores[node][self.scenarios.index(scenario)])

    @property
    def comprehensive(self) -> np.ndarray:
        return self.node_scores[self.root_name]

    def to_dict(self) -> dict:
        return {
            "scenarios": list(self.scenarios),
            "scores": {name: [float(v) for v in vals]
                       for name, vals in sorted(self.node_scores.items())},
            "ranking": list(self.ranking),
            "tied": self.tied,
            "leaf_values": {
                indicator: [float(v) for v in self.leaf_values.column(indicator)]
                for indicator in self.leaf_values.indicators
            },
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> dict:
        with open(path) as fh:
            return json.load(fh)


def rank_scenarios(scenarios, scores, tol: float = 1e-12):
    """Names ordered by descending score; ties keep name order and set the
    tie flag."""
    order = sorted(range(len(scenarios)), key=lambda i: (-scores[i], scenarios[i]))
    tied = any(
        abs(scores[order[i]] - scores[order[i + 1]]) <= tol
        for i in range(len(order) - 1)
    )
    return [scenarios[i] for i in order], tied


def rollup(tree: WeightTree, table: IndicatorTable) -> BenefitReport:
    """Weighted summation up the hierarchy: each node's score is the
    weighted sum of its children, leaves read their normalized column."""
    if not table.normalized:
        raise ValidationError("rollup needs a normalized indicator table")
    scores: dict = {}

    def evaluate(node: TreeNode) -> np.ndarray:
        if node.is_leaf:
            value = table.column(node.indicator)
        else:
            value = np.zeros(len(table.scenarios))
            for child in node.children:
                value = value + child.weight * evaluate(child)
        scores[node.name] = value
        return value

    evaluate(tree.root)
    used = [leaf.indicator for leaf in tree.leaves()]
    leaf_values = IndicatorTable(
        list(table.scenarios), used,
        np.column_stack([table.column(i) for i in used]),
        normalized=True,
    )
    return BenefitReport(
        scenarios=list(table.scenarios),
        node_scores=scores,
        leaf_values=leaf_values,
        root_name=tree.root.name,
    )


def comprehensive(report: BenefitReport):
    """Root scores by scenario plus the ranking (descending)."""
    scores = {
        name: float(v) for name, v in zip(report.scenarios, report.comprehensive)
    }
    return scores, list(report.ranking), report.tied


def facility_indicator_scores(scenarios, catalog: dict, leaves) -> IndicatorTable:
    """Raw economic/social indicator values derived from facility areas.

    Benefit leaves (mode A) score sum(area_f * favorability_f(indicator));
    cost leaves with the reciprocal transform (mode B) score
    1 / sum(area_f * unit_cost_weight_f), so cheaper scenarios score higher
    after normalization.
    """
    scenarios = list(scenarios)
    leaves = list(leaves)
    values = np.zeros((len(scenarios), len(leaves)))
    for i, scenario in enumerate(scenarios):
        areas = scenario.area_by_kind()
        for j, leaf in enumerate(leaves):
            if leaf.polarity == "cost" and leaf.transform == "reciprocal":
                weighted = sum(
                    area * catalog[kind].unit_cost_weight
                    for kind, area in areas.items()
                )
                if weighted <= 0:
                    raise ValidationError(
                        f"scenario {scenario.name!r}: zero facility cost basis"
                    )
                values[i, j] = 1.0 / weighted
            else:
                total = 0.0
                for kind, area in areas.items():
                    spec = catalog[kind]
                    if leaf.indicator not in spec.favorability:
                        raise ValidationError(
                            f"{kind.value}: no favorability score for "
                            f"{leaf.indicator!r}"
                        )
                    total += area * spec.favorability[leaf.indicator]
                values[i, j] = total
    return IndicatorTable(
        [s.name for s in scenarios], [leaf.indicator for leaf in leaves], values
    )


@dataclass
class StormSummary:
    """System-level result of one simulated storm."""

    storm: str
    volume_m3: float
    peak_lps: float
    peak_time_s: float
    loads_kg: dict

    @classmethod
    def from_outfalls(cls, storm: str, hydrographs: dict, loads: dict) -> "StormSummary":
        """Collapse per-outfall results: volumes and loads sum; the peak is
        taken on the summed outfall hydrograph."""
        if not hydrographs:
            raise ValidationError("no outfall hydrographs")
        step = next(iter(hydrographs.values())).step_s
        length = max(h.flows_lps.size for h in hydrographs.values())
        total = np.zeros(length)
        for h in hydrographs.values():
            total[: h.flows_lps.size] += h.flows_lps
        system = Hydrograph(site="system", step_s=step, flows_lps=total)
        peak, peak_time = peak_stats(system)
        volume = sum(h.volume_m3 for h in hydrographs.values())
        total_loads: dict = {}
        for by_pollutant in loads.values():
            for pollutant, kg in by_pollutant.items():
                total_loads[pollutant] = total_loads.get(pollutant, 0.0) + kg
        return cls(storm=storm, volume_m3=volume, peak_lps=peak,
                   peak_time_s=peak_time, loads_kg=total_loads)


def evaluate_environmental(baseline, by_scenario: dict, pollutants) -> IndicatorTable:
    """Environmental indicators per scenario, averaged over the storm suite.

    `baseline` and each scenario entry are sequences of StormSummary in the
    same storm order. Reductions are percentages relative to the baseline;
    the peak delay is in minutes (kept fractional here, rounded only in
    reports).
    """
    baseline = list(baseline)
    if not baseline:
        raise ValidationError("no baseline storm results")
    indicators = ["runoff_reduction", "peak_reduction", "peak_delay"] + [
        f"{p.lower()}_reduction" for p in pollutants
    ]
    names = list(by_scenario)
    values = np.zeros((len(names), len(indicators)))
    for i, name in enumerate(names):
        runs = list(by_scenario[name])
        if len(runs) != len(baseline):
            raise ValidationError(f"scenario {name!r}: storm suite mismatch")
        rows = []
        for base, scen in zip(baseline, runs):
            if base.volume_m3 <= 0:
                raise ValidationError(f"storm {base.storm}: zero baseline volume")
            row = [
                (base.volume_m3 - scen.volume_m3) / base.volume_m3 * 100.0,
                (base.peak_lps - scen.peak_lps) / base.peak_lps * 100.0,
                (scen.peak_time_s - base.peak_time_s) / 60.0,
            ]
            for pollutant in pollutants:
                b = base.loads_kg.get(pollutant, 0.0)
                s = scen.loads_kg.get(pollutant, 0.0)
                if b <= 0:
                    raise ValidationError(
                        f"storm {base.storm}: zero baseline load for {pollutant}"
                    )
                row.append((b - s) / b * 100.0)
            rows.append(row)
        values[i, :] = np.mean(rows, axis=0)
    return IndicatorTable(names, indicators, values)
