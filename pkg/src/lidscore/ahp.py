"""Pairwise-comparison weighting (analytic hierarchy process machinery).

Weights come from the principal eigenvector of a positive reciprocal
matrix (power iteration); judgment consistency is screened with the usual
CR = CI / RI rule, rejecting matrices at CR >= 0.1.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from lidscore.errors import ValidationError

# Random consistency index by matrix order (Saaty's constants).
RANDOM_INDEX = {1: 0.0, 2: 0.0, 3: 0.58, 4: 0.90, 5: 1.12, 6: 1.24,
                7: 1.32, 8: 1.41, 9: 1.45}

CR_LIMIT = 0.1


@dataclass(frozen=True)
class PairwiseMatrix:
    labels: tuple
    values: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", m)
        n = len(self.labels)
        if m.shape != (n, n):
            raise ValidationError(f"matrix shape {m.shape} does not match {n} labels")
        if np.any(m <= 0) or not np.all(np.isfinite(m)):
            raise ValidationError("pairwise entries must be positive and finite")
        if np.any(np.abs(np.diag(m) - 1.0) > 1e-9):
            raise ValidationError("pairwise diagonal must be 1")
        if np.any(np.abs(m * m.T - 1.0) > 1e-9):
            raise ValidationError("matrix is not reciprocal (a_ij * a_ji != 1)")
        if np.any(m > 9.0 + 1e-9) or np.any(m < 1.0 / 9.0 - 1e-12):
            warnings.warn("pairwise entries outside the 1/9..9 scale", stacklevel=3)

    @property
    def order(self) -> int:
        return len(self.labels)

    @classmethod
    def from_rows(cls, labels, rows) -> "PairwiseMatrix":
        """Build from row lists; None/blank lower-triangle entries are
        filled from the reciprocal of the upper triangle."""
        n = len(labels)
        m = np.ones((n, n))
        for i in range(n):
            for j in range(n):
                entry = rows[i][j] if j < len(rows[i]) else None
                if entry is None or (isinstance(entry, str) and not entry.strip()):
                    continue
                m[i, j] = _parse_entry(entry)
        for i in range(n):
            for j in range(i + 1, n):
                m[j, i] = 1.0 / m[i, j]
        return cls(tuple(labels), m)

    @classmethod
    def from_csv(cls, path) -> "PairwiseMatrix":
        """Read a matrix file: a header of labels, then one row per label.
        The upper triangle is sufficient; entries may be fractions ("1/3")."""
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            table = [row for row in reader if row and any(c.strip() for c in row)]
        if not table:
            raise ValidationError(f"{path}: empty matrix file")
        labels = [c.strip() for c in table[0] if c.strip()]
        rows = [row[: len(labels)] for row in table[1:]]
        if len(rows) != len(labels):
            raise ValidationError(f"{path}: expected {len(labels)} rows, got {len(rows)}")
        return cls.from_rows(labels, rows)


def _parse_entry(entry) -> float:
    if isinstance(entry, str) and "/" in entry:
        num, den = entry.split("/", 1)
        return float(num) / float(den)
    return float(entry)


@dataclass(frozen=True)
class WeightVector:
    labels: tuple
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValidationError("weights must sum to 1")
        if np.any(w < 0):
            raise ValidationError("weights must be non-negative")

    def as_dict(self) -> dict:
        return {label: float(w) for label, w in zip(self.labels, self.weights)}


@dataclass(frozen=True)
class ConsistencyReport:
    lambda_max: float
    ci: float
    ri: float
    cr: float
    order: int

    @property
    def passed(self) -> bool:
        return self.cr < CR_LIMIT

    @property
    def always_consistent(self) -> bool:
        # 1x1 and 2x2 reciprocal matrices cannot be inconsistent
        return self.order <= 2


def _principal_eigenvector(m: np.ndarray, tol: float = 1e-12, max_iter: int = 10_000):
    n = m.shape[0]
    v = np.full(n, 1.0 / n)
    lam = float(n)
    for _ in range(max_iter):
        mv = m @ v
        lam = float(mv.sum())
        v_next = mv / lam
        residual = float(np.max(np.abs(mv - lam * v)))
        v = v_next
        if residual < tol:
            return v, lam
    raise ValidationError(
        f"power iteration did not converge in {max_iter} iterations "
        f"(residual {residual:.3e})"
    )


def derive_weights(matrix: PairwiseMatrix, method: str = "eigenvector") -> WeightVector:
    """Priority weights of a pairwise matrix.

    `eigenvector` (default) returns the normalized principal eigenvector;
    `geometric` is the row-geometric-mean alternative kept for
    cross-checking.
    """
    if method == "eigenvector":
        w, _ = _principal_eigenvector(matrix.values)
    elif method == "geometric":
        g = np.exp(np.log(matrix.values).mean(axis=1))
        w = g / g.sum()
    else:
        raise ValidationError(f"unknown weighting method {method!r}")
    return WeightVector(matrix.labels, w)


def consistency(matrix: PairwiseMatrix) -> ConsistencyReport:
    """Consistency screen: lambda_max, CI = (lambda_max - n)/(n - 1), CR = CI/RI."""
    n = matrix.order
    if n < 2:
        return ConsistencyReport(1.0, 0.0, 0.0, 0.0, n)
    _, lam = _principal_eigenvector(matrix.values)
    ci = (lam - n) / (n - 1)
    if n == 2:
        return ConsistencyReport(lam, ci, 0.0, 0.0, n)
    if n not in RANDOM_INDEX:
        raise ValidationError(f"no random index for order {n}")
    ri = RANDOM_INDEX[n]
    return ConsistencyReport(lam, ci, ri, ci / ri, n)


def aggregate_matrices(matrices) -> PairwiseMatrix:
    """Combine several experts' matrices by elementwise geometric mean."""
    matrices = list(matrices)
    if not matrices:
        raise ValidationError("no matrices to aggregate")
    labels = matrices[0].labels
    for m in matrices[1:]:
        if m.labels != labels:
            raise ValidationError("matrices disagree on labels")
    stack = np.stack([m.values for m in matrices])
    return PairwiseMatrix(labels, np.exp(np.log(stack).mean(axis=0)))


def weight_tree(hierarchy: dict, matrices: dict, force: bool = False):
    """Fill hierarchy weights from one pairwise matrix per internal node.

    `hierarchy` is the nested node mapping accepted by
    evaluator.TreeNode.from_dict, without weights on the children of nodes
    named in `matrices`. Any node with CR >= 0.1 rejects the tree unless
    `force` is set. Returns (WeightTree, {node: ConsistencyReport}).
    """
    from lidscore.evaluator import TreeNode, WeightTree

    reports: dict = {}

    def build(spec: dict, weight: float) -> TreeNode:
        name = spec["name"]
        children_spec = spec.get("children") or []
        if not children_spec:
            return TreeNode.leaf_from_dict(spec, weight)
        if len(children_spec) == 1:
            weights = [1.0]
        else:
            matrix = matrices.get(name)
            if matrix is None:
                raise ValidationError(f"no pairwise matrix for node '{name}'")
            expected = tuple(c["name"] for c in children_spec)
            if matrix.labels != expected:
                raise ValidationError(
                    f"matrix labels for '{name}' do not match children {expected}"
                )
            report = consistency(matrix)
            reports[name] = report
            if not report.passed and not force:
                raise ValidationError(
                    f"node '{name}' rejected: CR = {report.cr:.4f} >= {CR_LIMIT}"
                )
            weights = derive_weights(matrix).weights
        children = tuple(
            build(child, float(w)) for child, w in zip(children_spec, weights)
        )
        return TreeNode(name=name, weight=weight, children=children)

    return WeightTree(build(hierarchy, 1.0)), reports
