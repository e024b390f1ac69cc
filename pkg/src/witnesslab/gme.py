"""Three-qubit criteria for genuine multipartite entanglement.

Matrix elements use 1-based names in comments (``rho_18`` couples ``|000>``
and ``|111>``) and 0-based indices in code.

``q_ghz`` and ``q_dicke`` are concave in the state and every coherence
enters only as ``-|rho_ij|``. A local phase twirl (independent random
``diag(1, e^{i phi})`` on each qubit) keeps the diagonal, removes all
coherences and maps separable states to separable states, so their maximum
over mixed (fully or bi-)separable states equals their maximum over
diagonal states. :func:`dephased_maximum` computes that value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .errors import DimensionError, InputError
from .operators import HermitianOperator
from .separability import (
    MixtureCertificate,
    OptimizerConfig,
    all_pure_extremum,
    biseparable_extremum,
    certificate_matrix,
    functional_extremum,
    project_simplex,
)
from .states import DensityMatrix, ProductVector, PureState, dicke3, ghz3

THREE_QUBITS = (2, 2, 2)
SIGN_TOL = 1e-9
WINDOW_TOL = 1e-6
CLASSES = ("fully_separable", "biseparable", "all_states")
DICKE_VARIANTS = ("printed", "cancelled", "mirrored")


def _rho(s) -> np.ndarray:
    if isinstance(s, HermitianOperator):
        if s.dims != THREE_QUBITS:
            raise DimensionError(f"criterion needs a three-qubit state, got profile {s.dims}")
        return s.matrix
    m = np.asarray(s)
    if m.shape != (8, 8):
        raise DimensionError(f"criterion needs an 8x8 density matrix, got shape {m.shape}")
    return m


def _diag(m: np.ndarray) -> np.ndarray:
    return np.clip(np.real(np.diag(m)), 0.0, None)


def q_ghz(s) -> float:
    """``2 (sqrt(r22 r77) + sqrt(r33 r66) + sqrt(r44 r55) - |r18|)``; negative means GME."""
    m = _rho(s)
    d = _diag(m)
    return float(
        2 * (np.sqrt(d[1] * d[6]) + np.sqrt(d[2] * d[5]) + np.sqrt(d[3] * d[4]) - abs(m[0, 7]))
    )


def q_ghz_lin_operator() -> HermitianOperator:
    """Operator ``G`` with ``tr[G rho] = 1 - r11 - r88 + 2 Re r18``."""
    g = np.eye(8)
    g[0, 0] = g[7, 7] = 0.0
    g[0, 7] = g[7, 0] = 1.0
    return HermitianOperator(g, THREE_QUBITS)


def q_ghz_lin(s) -> float:
    m = _rho(s)
    return float(1 - m[0, 0].real - m[7, 7].real + 2 * m[0, 7].real)


def q_dicke(s, variant: str = "mirrored") -> float:
    """Dicke-state criterion.

    ``printed`` evaluates the displayed formula term by term (its square
    roots cancel), ``cancelled`` is the simplified ``r22 + r33 + r55``, and
    ``mirrored`` replaces the cancelling terms by the coherences
    ``-|r23| - |r25| - |r35|``; it is -1 on the Dicke state and nonnegative
    on biseparable states.
    """
    m = _rho(s)
    d = _diag(m)
    s14, s16, s17 = np.sqrt(d[0] * d[3]), np.sqrt(d[0] * d[5]), np.sqrt(d[0] * d[6])
    pops = (d[1] + d[2] + d[4]) / 2
    if variant == "printed":
        return float(2 * (pops + s14 + s16 + s17 - s14 - s16 - s17))
    if variant == "cancelled":
        return float(d[1] + d[2] + d[4])
    if variant == "mirrored":
        coh = abs(m[1, 2]) + abs(m[1, 4]) + abs(m[2, 4])
        return float(2 * (s14 + s16 + s17 + pops - coh))
    raise InputError(f"unknown Q_Dicke variant {variant!r}; choose from {DICKE_VARIANTS}")


@dataclass(frozen=True)
class Criterion:
    name: str
    evaluator: Callable[[object], float]
    normalization_state: PureState
    normalization_value: float
    operator: HermitianOperator | None = None
    twirl_monotone: bool = False

    def __call__(self, s) -> float:
        return self.evaluator(s)

    @property
    def functional(self):
        """What the optimizers consume: the operator if linear, else the evaluator."""
        return self.operator if self.operator is not None else self.evaluator


def _dicke_variant(variant):
    def f(s):
        return q_dicke(s, variant)

    f.__name__ = f"q_dicke_{variant}"
    return f


CRITERIA: dict[str, Criterion] = {
    "qghz": Criterion("qghz", q_ghz, ghz3(), -1.0, twirl_monotone=True),
    "qghzlin": Criterion("qghzlin", q_ghz_lin, ghz3(), 1.0, operator=q_ghz_lin_operator()),
    "qdicke:printed": Criterion("qdicke:printed", _dicke_variant("printed"), dicke3(), 1.0, twirl_monotone=True),
    "qdicke:cancelled": Criterion("qdicke:cancelled", _dicke_variant("cancelled"), dicke3(), 1.0, twirl_monotone=True),
    "qdicke:mirrored": Criterion("qdicke:mirrored", _dicke_variant("mirrored"), dicke3(), -1.0, twirl_monotone=True),
}

# Windows as displayed for fully separable states, plus the all-states claim.
PAPER_WINDOWS = {
    ("qghz", "fully_separable"): (0.0, 0.5),
    ("qghzlin", "fully_separable"): (-0.25, 1.25),
    ("qdicke:mirrored", "fully_separable"): (0.0, 1.0),
}
PAPER_ALL_STATES_MAX = {"qdicke": 1.5}


def criterion(name: str) -> Criterion:
    key = "qdicke:mirrored" if name == "qdicke" else name
    if key not in CRITERIA:
        raise InputError(f"unknown criterion {name!r}; known: {sorted(CRITERIA)}")
    return CRITERIA[key]


def _basis_product(index: int) -> ProductVector:
    bits = [(index >> (2 - q)) & 1 for q in range(3)]
    factors = tuple(np.eye(2)[b] for b in bits)
    return ProductVector(THREE_QUBITS, factors, ((0,), (1,), (2,)))


def dephased_maximum(f: Callable, cfg: OptimizerConfig | None = None):
    """Maximum of ``f`` over diagonal three-qubit states, with its certificate.

    For twirl-monotone criteria this is the maximum over all mixed separable
    (and all) states. Concave objective, so multistart Powell on the
    probability simplex is reliable.
    """
    cfg = cfg or OptimizerConfig()

    def objective(w):
        return -float(f(np.diag(project_simplex(w))))

    best = None
    for r in range(min(cfg.restarts, 16)):
        rng = np.random.default_rng(cfg.seed + r)
        res = minimize(objective, rng.dirichlet(np.ones(8)), method="Powell",
                       options={"xtol": 1e-10, "ftol": 1e-14, "maxfev": 20000})
        if best is None or res.fun < best.fun - 1e-12:
            best = res
    p = project_simplex(best.x)
    keep = [i for i in range(8) if p[i] > 0]
    cert = MixtureCertificate(tuple(float(p[i]) for i in keep), tuple(_basis_product(i) for i in keep))
    return float(f(certificate_matrix(cert))), cert


@dataclass
class CriterionWindow:
    criterion: str
    cls: str
    lo: float
    hi: float
    certificates: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "criterion": self.criterion,
            "class": self.cls,
            "lo": self.lo,
            "hi": self.hi,
            "certificates": {k: v.to_dict() for k, v in self.certificates.items()},
            "metadata": self.metadata,
        }
        return out


def criterion_window(c: Criterion | str, cls: str, cfg: OptimizerConfig | None = None) -> CriterionWindow:
    """Range of a criterion over a state class.

    Endpoints are searched over pure (partition-)product states, or mixtures
    of ``cfg.mixture_rank`` of them. For twirl-monotone criteria the
    metadata also carries ``mixed_max``, the exact maximum over mixed
    states of the class.
    """
    c = criterion(c) if isinstance(c, str) else c
    cfg = cfg or OptimizerConfig()
    f = c.functional
    if cls == "fully_separable":
        lo = functional_extremum(f, THREE_QUBITS, "min", cfg)
        hi = functional_extremum(f, THREE_QUBITS, "max", cfg)
    elif cls == "biseparable":
        lo = biseparable_extremum(f, "min", cfg)
        hi = biseparable_extremum(f, "max", cfg)
    elif cls == "all_states":
        lo = all_pure_extremum(f, THREE_QUBITS, "min", cfg)
        hi = all_pure_extremum(f, THREE_QUBITS, "max", cfg)
    else:
        raise InputError(f"unknown state class {cls!r}; choose from {CLASSES}")
    meta = {"min": lo.metadata(), "max": hi.metadata()}
    if c.twirl_monotone:
        value, cert = dephased_maximum(c.evaluator, cfg)
        meta["mixed_max"] = {"value": value, "certificate": cert.to_dict()}
    return CriterionWindow(
        criterion=c.name,
        cls=cls,
        lo=lo.value,
        hi=hi.value,
        certificates={"lo": lo.certificate, "hi": hi.certificate},
        metadata=meta,
    )


@lru_cache(maxsize=None)
def fully_separable_upper(name: str, cfg: OptimizerConfig) -> float:
    """Upper endpoint of a criterion over mixed fully separable states."""
    c = criterion(name)
    if c.operator is not None:
        return functional_extremum(c.operator, THREE_QUBITS, "max", cfg).value
    if c.twirl_monotone:
        return dephased_maximum(c.evaluator, cfg)[0]
    return functional_extremum(c.evaluator, THREE_QUBITS, "max", cfg.replace(mixture_rank=4)).value


VERDICT_CRITERIA = ("qghz", "qdicke:mirrored", "qghzlin")


@dataclass
class GmeVerdict:
    level: str  # GME | NOT_FULLY_SEPARABLE | UNDECIDED
    values: dict
    upper_bounds: dict
    reasons: list

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "values": self.values,
            "upper_bounds": self.upper_bounds,
            "reasons": self.reasons,
        }


def gme_verdict(s, cfg: OptimizerConfig | None = None) -> GmeVerdict:
    """GME if ``q_ghz`` or mirrored ``q_dicke`` is negative; otherwise
    NOT_FULLY_SEPARABLE if a criterion exceeds its mixed fully-separable
    maximum; otherwise UNDECIDED."""
    cfg = cfg or OptimizerConfig()
    s = DensityMatrix.from_operator(s) if isinstance(s, HermitianOperator) else s
    values = {name: criterion(name)(s) for name in VERDICT_CRITERIA}
    reasons = [f"{n} = {values[n]:.6g} < 0" for n in ("qghz", "qdicke:mirrored") if values[n] < -SIGN_TOL]
    if reasons:
        return GmeVerdict("GME", values, {}, reasons)
    bounds = {name: fully_separable_upper(name, cfg) for name in VERDICT_CRITERIA}
    reasons = [
        f"{n} = {values[n]:.6g} exceeds fully separable maximum {bounds[n]:.6g}"
        for n in VERDICT_CRITERIA
        if values[n] > bounds[n] + WINDOW_TOL
    ]
    return GmeVerdict("NOT_FULLY_SEPARABLE" if reasons else "UNDECIDED", values, bounds, reasons)
