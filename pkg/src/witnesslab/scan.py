"""Classify the Bell-diagonal (magic simplex) family against a separability window.

Grid points are ``c in [-1, 1]^3`` with spacing ``step``. Each point gets one
of ``nonphysical``, ``separable``, ``detected_lower``, ``detected_upper`` or
``entangled_undetected``. Physicality and separability are ground truth
(eigenvalues and the octahedron ``|c1| + |c2| + |c3| <= 1``), the detection
classes come from ``tr[observable rho(c)]`` against the window.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .errors import DimensionError, InputError
from .operators import HermitianOperator, pauli_matrices
from .separability import SeparabilityWindow
from .states import STATE_TOL, SimplexPoint, simplex_classify, simplex_state
from .witnesses import DETECT_TOL

CSV_COLUMNS = ("c1", "c2", "c3", "class", "trace_value")
SCAN_CLASSES = ("nonphysical", "separable", "detected_lower", "detected_upper", "entangled_undetected")
# slack for "within optimizer tolerance of a bound"
BOUND_SLACK = 1e-4


def grid_axis(step: float) -> list[Fraction]:
    """Exact grid coordinates ``-1, -1 + step, ...`` up to 1."""
    if not (0 < step <= 1):
        raise InputError(f"grid step must lie in (0, 1], got {step}")
    s = Fraction(repr(float(step)))
    n = int(2 / s)
    return [-1 + i * s for i in range(n + 1)]


@dataclass
class ScanResult:
    c: np.ndarray  # (N, 3) float coordinates
    classes: list[str]
    trace_values: np.ndarray
    window: SeparabilityWindow
    step: float
    counts: dict = field(default_factory=dict)

    @property
    def entangled(self) -> int:
        return sum(self.counts.get(k, 0) for k in SCAN_CLASSES[2:])

    @property
    def undetected_fraction(self) -> float:
        return self.counts["entangled_undetected"] / self.entangled if self.entangled else 0.0

    def near_bound_count(self, slack: float = BOUND_SLACK) -> int:
        """Undetected entangled points within ``slack`` of ``L`` or ``U``."""
        L, U = self.window.L, self.window.U
        n = 0
        for k, v in zip(self.classes, self.trace_values):
            if k == "entangled_undetected" and min(v - L, U - v) <= slack:
                n += 1
        return n

    def rows(self) -> Iterator[tuple]:
        for (c1, c2, c3), k, v in zip(self.c, self.classes, self.trace_values):
            yield (repr(float(c1)), repr(float(c2)), repr(float(c3)), k, repr(float(v)))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            writer.writerows(self.rows())

    def summary(self) -> dict:
        beyond = self.counts["entangled_undetected"] - self.near_bound_count()
        return {
            "step": self.step,
            "points": len(self.classes),
            "counts": {k: self.counts.get(k, 0) for k in SCAN_CLASSES},
            "entangled": self.entangled,
            "undetected_fraction": self.undetected_fraction,
            "undetected_beyond_slack_fraction": beyond / self.entangled if self.entangled else 0.0,
            "coverage": 1.0 - self.undetected_fraction,
            "window": {"L": self.window.L, "U": self.window.U},
        }


def simplex_scan(
    observable: HermitianOperator,
    window: SeparabilityWindow,
    step: float = 0.05,
    tol: float = DETECT_TOL,
) -> ScanResult:
    if observable.dims != (2, 2):
        raise DimensionError("the simplex scan needs a two-qubit observable")
    axis = grid_axis(step)
    den = np.lcm.reduce([x.denominator for x in axis])
    num = np.array([int(x * den) for x in axis], dtype=np.int64)
    i1, i2, i3 = np.meshgrid(num, num, num, indexing="ij")
    ints = np.stack([i1.ravel(), i2.ravel(), i3.ravel()], axis=1)
    c = ints / den

    sig = [np.kron(s, s) for s in pauli_matrices()]
    rho = (np.eye(4) + np.einsum("ni,ijk->njk", c, np.array(sig))) / 4
    lam_min = np.linalg.eigvalsh(rho)[:, 0]
    # tr[A rho(c)] = (tr A + sum_i c_i tr[A s_i s_i]) / 4
    a = observable.matrix
    coeff = np.array([np.trace(a @ s).real for s in sig])
    values = (np.trace(a).real + c @ coeff) / 4

    separable = np.abs(ints).sum(axis=1) <= den
    classes = []
    for lm, sep, v in zip(lam_min, separable, values):
        if lm < -STATE_TOL:
            classes.append("nonphysical")
        elif sep:
            classes.append("separable")
        elif v < window.L - tol:
            classes.append("detected_lower")
        elif v > window.U + tol:
            classes.append("detected_upper")
        else:
            classes.append("entangled_undetected")
    counts = {k: classes.count(k) for k in SCAN_CLASSES}
    return ScanResult(c, classes, values, window, float(step), counts)


def classify_point(c, observable: HermitianOperator, window: SeparabilityWindow, tol: float = DETECT_TOL):
    """Class and trace value of a single simplex point."""
    p = SimplexPoint(*c)
    truth = simplex_classify(p)
    value = observable.expectation(simplex_state(p))
    if truth != "entangled":
        return truth, value
    if value < window.L - tol:
        return "detected_lower", value
    if value > window.U + tol:
        return "detected_upper", value
    return "entangled_undetected", value
