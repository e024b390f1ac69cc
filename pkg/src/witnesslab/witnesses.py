"""Entanglement witnesses: built-ins, evaluation, validation, detection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionError, InputError, NotAWitnessError, PreconditionError
from .operators import HermitianOperator, eigvalsh, partial_transpose
from .separability import OptimizerConfig, SeparabilityWindow, seesaw_extremum
from .states import ProductVector, max_entangled

TRACE_FLOOR = 1e-6
BORDER_TOL = 1e-6
NEGATIVITY_TOL = 1e-9
DETECT_TOL = 1e-9


@dataclass(frozen=True)
class ValidityCertificate:
    L_estimate: float
    minimizer: ProductVector
    lambda_min: float
    valid: bool
    border: bool
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "L_estimate": self.L_estimate,
            "lambda_min": self.lambda_min,
            "valid": self.valid,
            "border": self.border,
            "reason": self.reason,
            "minimizer": self.minimizer.to_dict(),
        }


class Witness(HermitianOperator):
    """Trace-one Hermitian observable with cached extreme eigenvalues.

    Input is rescaled by ``1 / trace``; operators with ``|trace| < 1e-6``
    are rejected.
    """

    __slots__ = ("lambda_min", "lambda_max", "validity")

    def __init__(self, matrix, dims, validity: ValidityCertificate | None = None):
        op = HermitianOperator(matrix, dims)
        tr = op.trace()
        if abs(tr) < TRACE_FLOOR:
            raise PreconditionError(f"cannot trace-normalize an operator with trace {tr:.3g}")
        super().__init__(op.matrix / tr, op.profile)
        lam = eigvalsh(self)
        self.lambda_min = float(lam[0])
        self.lambda_max = float(lam[-1])
        self.validity = validity

    @classmethod
    def from_operator(cls, op: HermitianOperator) -> "Witness":
        if isinstance(op, Witness):
            return op
        return cls(op.matrix, op.profile)


def _ew2q_plus() -> np.ndarray:
    return np.array([[1, 0, 0, -4], [0, 3, 0, 0], [0, 0, 3, 0], [-4, 0, 0, 1]]) / 8


def _ew2q_minus() -> np.ndarray:
    return np.array([[3, 0, 0, 4], [0, 1, 0, 0], [0, 0, 1, 0], [4, 0, 0, 3]]) / 8


def _choi3() -> np.ndarray:
    d = 3
    m = np.zeros((d * d, d * d))
    for i in range(d):
        ii = i * d + i
        shifted = i * d + (i - 1) % d
        m[ii, ii] += 2
        m[shifted, shifted] += 1
    p = max_entangled(3).density().matrix.real
    return (m - 3 * p) / 6


def _choi3_mirror() -> np.ndarray:
    # mirror partner of the Choi witness: (2/9) I - W, not (2/9) I - W~
    return 2 / 9 * np.eye(9) - _choi3()


BUILTINS: dict[str, tuple[Callable[[], np.ndarray], tuple[int, ...]]] = {
    "ew2q_plus": (_ew2q_plus, (2, 2)),
    "ew2q_minus": (_ew2q_minus, (2, 2)),
    "choi3": (_choi3, (3, 3)),
    "choi3_mirror": (_choi3_mirror, (3, 3)),
}


def builtin(name: str) -> Witness:
    """Built-in witness by name (``ew2q_plus`` or ``ew2q:plus`` style)."""
    key = name.replace(":", "_")
    if key not in BUILTINS:
        raise InputError(f"unknown witness {name!r}; known: {sorted(BUILTINS)}")
    make, dims = BUILTINS[key]
    return Witness(make(), dims)


def evaluate(w: HermitianOperator, s: HermitianOperator) -> float:
    """``tr[w s]``."""
    if w.dims != s.dims:
        raise DimensionError(f"profile mismatch: {w.dims} vs {s.dims}")
    return w.expectation(s)


def detection_threshold(
    w: HermitianOperator,
    family: Callable[[float], HermitianOperator],
    bound: float = 0.0,
) -> float:
    """Parameter ``t`` at which ``tr[w family(t)]`` crosses ``bound``.

    ``family`` must be affine on [0, 1]; the expectation is then affine and
    the root follows from its two endpoint values.
    """
    e0 = evaluate(w, family(0.0))
    e1 = evaluate(w, family(1.0))
    mid = evaluate(w, family(0.5))
    if abs(mid - 0.5 * (e0 + e1)) > 1e-12:
        raise PreconditionError("state family is not affine in its parameter")
    slope = e1 - e0
    if abs(slope) < 1e-14:
        raise PreconditionError("expectation is constant along the family; no crossing")
    return (bound - e0) / slope


@dataclass(frozen=True)
class DetectionVerdict:
    kind: str  # detected_lower | detected_upper | not_detected
    margin: float
    value: float

    def to_dict(self) -> dict:
        return {"kind": self.kind, "margin": self.margin, "value": self.value}


def detect(
    window: SeparabilityWindow,
    observable: HermitianOperator,
    s: HermitianOperator,
    tol: float = DETECT_TOL,
) -> DetectionVerdict:
    """Compare ``tr[observable s]`` with the separability window of ``observable``."""
    value = evaluate(observable, s)
    if value < window.L - tol:
        return DetectionVerdict("detected_lower", window.L - value, value)
    if value > window.U + tol:
        return DetectionVerdict("detected_upper", value - window.U, value)
    margin = max(0.0, min(value - window.L, window.U - value))
    return DetectionVerdict("not_detected", margin, value)


def validate_witness(
    w: HermitianOperator, cfg: OptimizerConfig | None = None
) -> ValidityCertificate:
    """Numerically certify that ``w`` is a witness.

    Requires ``min tr[w sigma] >= -1e-6`` over product states and a negative
    eigenvalue below ``-1e-9``. Raises :class:`NotAWitnessError` otherwise;
    the exception carries the certificate.
    """
    w = Witness.from_operator(w)
    res = seesaw_extremum(w, "min", cfg)
    L = res.value
    lam = w.lambda_min
    reason = ""
    if L < -BORDER_TOL:
        reason = f"negative on a product state (L = {L:.3g})"
    elif lam >= -NEGATIVITY_TOL:
        reason = f"no negative eigenvalue (lambda_min = {lam:.3g}); detects nothing"
    cert = ValidityCertificate(
        L_estimate=L,
        minimizer=res.certificate,
        lambda_min=lam,
        valid=not reason,
        border=abs(L) <= BORDER_TOL,
        reason=reason,
    )
    if reason:
        raise NotAWitnessError(f"not an entanglement witness: {reason}", cert)
    return cert


def sufficient_decomposable(w: HermitianOperator, tol: float = 1e-10) -> str:
    """``'decomposable'`` when ``w`` is the partial transpose of a PSD operator.

    Only a sufficient test (``A = 0, B = w^Gamma``); failure gives
    ``'inconclusive'``.
    """
    if w.profile.parties != 2:
        raise DimensionError("decomposability test needs a bipartite operator")
    if eigvalsh(partial_transpose(w, 1))[0] >= -tol:
        return "decomposable"
    return "inconclusive"

