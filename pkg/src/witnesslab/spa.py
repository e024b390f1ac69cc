"""Structural physical approximation and witness compression.

For a witness ``W`` and a full-rank reference state ``X`` (default ``I/D``):

* p-XPA: ``(1 - p) W + p X`` with the smallest ``p`` making it PSD,
* n-XPA: ``(1 - q) W + q X`` with the largest ``q > 1`` making it PSD.

:func:`compress` turns one witness into a mirrored pair sharing a single
positive observable ``Wt``, whose separability window ``[L, U]`` has both
ends violated by entangled states.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NotAWitnessError, PreconditionError
from .operators import HermitianOperator, eigvalsh, identity, maximally_mixed, to_dict
from .separability import (
    OptimizerConfig,
    SeparabilityWindow,
    ratio_extremum,
    seesaw_extremum,
    separability_window,
)
from .witnesses import BORDER_TOL, NEGATIVITY_TOL, ValidityCertificate, Witness, validate_witness

WEIGHT_TOL = 1e-12
CROSSCHECK_TOL = 1e-9
PROP2_TOL = 1e-4
CEW_TOL = 1e-6


@dataclass(frozen=True)
class SpaResult:
    weight: float
    mixed: HermitianOperator
    method: str  # closed_form | bisection
    crosscheck: float | None = None

    def to_dict(self) -> dict:
        out = {
            "weight": self.weight,
            "method": self.method,
            "mixed": to_dict(self.mixed),
            "spectrum": eigvalsh(self.mixed).tolist(),
        }
        if self.crosscheck is not None:
            out["bisection_weight"] = self.crosscheck
        return out


def _is_maximally_mixed(x: HermitianOperator) -> bool:
    return bool(np.max(np.abs(x.matrix - np.eye(x.D) / x.D)) <= 1e-14)


def _check_reference(w: HermitianOperator, x: HermitianOperator | None) -> HermitianOperator:
    if x is None:
        return maximally_mixed(w.profile)
    if x.dims != w.dims:
        raise DimensionError(f"reference profile {x.dims} does not match {w.dims}")
    if abs(x.trace() - 1.0) > 1e-10:
        raise PreconditionError("reference operator must have unit trace")
    lam = eigvalsh(x)[0]
    if lam <= 1e-12:
        raise PreconditionError(f"reference operator must be full rank and PSD (lambda_min = {lam:.3g})")
    return x


def _mix(w: HermitianOperator, x: HermitianOperator, t: float) -> HermitianOperator:
    return HermitianOperator((1 - t) * w.matrix + t * x.matrix, w.profile)


def _min_eig(w, x, t) -> float:
    return float(np.linalg.eigvalsh((1 - t) * w.matrix + t * x.matrix)[0])


def _bisect_positive(w, x) -> float:
    if _min_eig(w, x, 0.0) >= 0:
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > WEIGHT_TOL:
        mid = 0.5 * (lo + hi)
        if _min_eig(w, x, mid) >= 0:
            hi = mid
        else:
            lo = mid
    return hi


def _bisect_negative(w, x) -> float:
    lo, hi = 1.0, 2.0
    while _min_eig(w, x, hi) >= 0:
        lo, hi = hi, 2 * hi
        if hi > 2.0**60:
            raise PreconditionError("no finite n-XPA weight: the mixture stays PSD")
    # relative stop keeps the loop finite for large weights
    while hi - lo > WEIGHT_TOL * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if _min_eig(w, x, mid) >= 0:
            lo = mid
        else:
            hi = mid
    return lo


def xpa(w: HermitianOperator, x: HermitianOperator, mode: str = "positive") -> SpaResult:
    """Extremal mixing weight with reference ``x`` found by bisection.

    ``t -> lambda_min((1 - t) w + t x)`` is concave, so the PSD set of
    weights is an interval and bisection on its edge is exact.
    """
    x = _check_reference(w, x)
    if mode == "positive":
        t = _bisect_positive(w, x)
    elif mode == "negative":
        if np.max(np.abs(w.matrix - x.matrix)) < 1e-14:
            raise PreconditionError("no finite n-XPA weight: witness equals the reference")
        t = _bisect_negative(w, x)
    else:
        raise PreconditionError(f"mode must be 'positive' or 'negative', got {mode!r}")
    return SpaResult(t, _mix(w, x, t), "bisection")


def spa_plus(w: HermitianOperator, x: HermitianOperator | None = None) -> SpaResult:
    """p-SPA; closed form ``D|l| / (1 + D|l|)`` for ``x = I/D``, cross-checked by bisection."""
    x = _check_reference(w, x)
    if not _is_maximally_mixed(x):
        return xpa(w, x, "positive")
    lam = float(eigvalsh(w)[0])
    if lam >= 0:
        return SpaResult(0.0, w, "closed_form", 0.0)
    D = w.D
    p = D * -lam / (1 + D * -lam)
    check = _bisect_positive(w, x)
    if abs(check - p) > CROSSCHECK_TOL:
        raise ArithmeticError(f"closed-form weight {p} disagrees with bisection {check}")
    return SpaResult(p, _mix(w, x, p), "closed_form", check)


def spa_minus(w: HermitianOperator, x: HermitianOperator | None = None) -> SpaResult:
    """n-SPA; closed form ``D l_max / (D l_max - 1)`` for ``x = I/D``."""
    x = _check_reference(w, x)
    if not _is_maximally_mixed(x):
        return xpa(w, x, "negative")
    lam = float(eigvalsh(w)[-1])
    D = w.D
    if D * lam - 1 <= 1e-12:
        raise PreconditionError("no finite n-SPA: lambda_max <= 1/D")
    q = D * lam / (D * lam - 1)
    check = _bisect_negative(w, x)
    if abs(check - q) > CROSSCHECK_TOL:
        raise ArithmeticError(f"closed-form weight {q} disagrees with bisection {check}")
    return SpaResult(q, _mix(w, x, q), "closed_form", check)


@dataclass
class MirrorPair:
    """Two witnesses sharing the compressed observable ``compressed``.

    ``compressed = (1 - p_plus) w_plus + p_plus x = (1 - p_minus) w_minus + p_minus x``.
    ``ratio_window`` is ``[p_plus, p_minus]``, the range of
    ``tr[compressed s] / tr[x s]`` over separable ``s``.
    """

    w_plus: Witness
    w_minus: Witness
    compressed: HermitianOperator
    x: HermitianOperator
    p_plus: float
    p_minus: float
    window: SeparabilityWindow | None = None
    trivial_upper_bound: bool = False
    shift: float = 0.0
    validity: ValidityCertificate | None = None
    extra: dict = field(default_factory=dict)

    @property
    def ratio_window(self) -> tuple[float, float]:
        return (self.p_plus, self.p_minus)

    @property
    def identity_reference(self) -> bool:
        return _is_maximally_mixed(self.x)

    def to_dict(self) -> dict:
        out = {
            "p_plus": self.p_plus,
            "p_minus": self.p_minus,
            "ratio_window": list(self.ratio_window),
            "border_shift": self.shift,
            "trivial_upper_bound": self.trivial_upper_bound,
            "w_plus": to_dict(self.w_plus),
            "w_minus": to_dict(self.w_minus),
            "compressed": to_dict(self.compressed),
            "x": to_dict(self.x),
            "spectra": {
                "w_plus": eigvalsh(self.w_plus).tolist(),
                "w_minus": eigvalsh(self.w_minus).tolist(),
                "compressed": eigvalsh(self.compressed).tolist(),
            },
        }
        if self.window is not None:
            out["window"] = self.window.to_dict()
        if self.validity is not None:
            out["validity"] = self.validity.to_dict()
        out.update(self.extra)
        return out


def compress(
    w: HermitianOperator,
    x: HermitianOperator | None = None,
    cfg: OptimizerConfig | None = None,
    shift: bool = True,
) -> MirrorPair:
    """Compress a witness into a positive observable and its mirrored witness.

    Steps: validate; shift onto the border if ``|L(w)| > 1e-6``; p-XPA to
    get ``Wt``; ``q = max tr[Wt s] / tr[x s]`` over product states; mirror
    ``(q x - Wt) / (q - 1)``. A mirror without a negative eigenvalue is
    flagged ``trivial_upper_bound`` rather than raised.
    """
    cfg = cfg or OptimizerConfig()
    w = Witness.from_operator(w)
    x = _check_reference(w, x)
    cert = validate_witness(w, cfg)
    L = cert.L_estimate
    applied = 0.0
    if shift and abs(L) > BORDER_TOL:
        w = Witness((w - L * identity(w.profile)).matrix, w.profile)
        applied = L

    plus = spa_plus(w, x)
    if plus.weight <= 0:
        raise NotAWitnessError("witness has no negative eigenvalue", cert)
    wt = plus.mixed
    q = ratio_extremum(wt, x, "max", cfg).value
    if q <= 1 + 1e-12:
        raise PreconditionError("compressed observable has no finite mirror (q <= 1)")
    w_minus = Witness(((q * x - wt) / (q - 1)).matrix, w.profile)
    trivial = w_minus.lambda_min >= -NEGATIVITY_TOL
    window = separability_window(wt, cfg)
    return MirrorPair(
        w_plus=w,
        w_minus=w_minus,
        compressed=wt,
        x=x,
        p_plus=plus.weight,
        p_minus=q,
        window=window,
        trivial_upper_bound=trivial,
        shift=applied,
        validity=cert,
    )


def mirror_pair(
    w_plus: HermitianOperator,
    w_minus: HermitianOperator,
    x: HermitianOperator | None = None,
) -> MirrorPair:
    """Pair two given witnesses through their own p-SPA and n-SPA weights."""
    w_plus = Witness.from_operator(w_plus)
    w_minus = Witness.from_operator(w_minus)
    x = _check_reference(w_plus, x)
    plus = spa_plus(w_plus, x)
    minus = spa_minus(w_minus, x)
    return MirrorPair(
        w_plus=w_plus,
        w_minus=w_minus,
        compressed=plus.mixed,
        x=x,
        p_plus=plus.weight,
        p_minus=minus.weight,
        extra={"mixture_gap": float(np.max(np.abs(plus.mixed.matrix - minus.mixed.matrix)))},
    )


def mirror_identity_residual(pair: MirrorPair) -> float:
    """Max-norm of ``(1 - p+) W+ + (p- - 1) W- - (p- - p+) X``."""
    p, q = pair.p_plus, pair.p_minus
    r = (1 - p) * pair.w_plus.matrix + (q - 1) * pair.w_minus.matrix - (q - p) * pair.x.matrix
    return float(np.max(np.abs(r)))


@dataclass(frozen=True)
class Prop2Bounds:
    U_plus: float
    U_minus: float
    direct_plus: float
    direct_minus: float

    @property
    def agree(self) -> bool:
        return (
            abs(self.U_plus - self.direct_plus) <= PROP2_TOL
            and abs(self.U_minus - self.direct_minus) <= PROP2_TOL
        )

    def to_dict(self) -> dict:
        return {
            "U_plus": self.U_plus,
            "U_minus": self.U_minus,
            "direct_plus": self.direct_plus,
            "direct_minus": self.direct_minus,
            "agree": self.agree,
        }


def prop2_bounds(pair: MirrorPair, cfg: OptimizerConfig | None = None) -> Prop2Bounds:
    """Upper bounds of both witnesses over separable states.

    ``U(W+-) = +-(U - L) / (1 - p+-)`` from the window of the compressed
    observable, next to a direct see-saw maximization of each witness.
    """
    if not pair.identity_reference:
        raise PreconditionError("upper-bound formula holds for the maximally mixed reference only")
    window = pair.window or separability_window(pair.compressed, cfg)
    width = window.U - window.L
    return Prop2Bounds(
        U_plus=width / (1 - pair.p_plus),
        U_minus=-width / (1 - pair.p_minus),
        direct_plus=seesaw_extremum(pair.w_plus, "max", cfg).value,
        direct_minus=seesaw_extremum(pair.w_minus, "max", cfg).value,
    )


@dataclass(frozen=True)
class CompressionReport:
    compressed: bool
    lambda_min: float
    lambda_max: float
    L: float
    U: float

    def __bool__(self):
        return self.compressed

    def to_dict(self) -> dict:
        return {
            "compressed": self.compressed,
            "lambda_min": self.lambda_min,
            "lambda_max": self.lambda_max,
            "L": self.L,
            "U": self.U,
        }


def is_compressed(wt: HermitianOperator, cfg: OptimizerConfig | None = None) -> CompressionReport:
    """Whether a positive observable has ``lambda_min < L`` and ``U < lambda_max``."""
    lam = eigvalsh(wt)
    if lam[0] < -1e-10:
        raise PreconditionError("a compressed witness must be PSD")
    window = separability_window(wt, cfg)
    ok = lam[0] < window.L - CEW_TOL and window.U < lam[-1] - CEW_TOL
    return CompressionReport(bool(ok), float(lam[0]), float(lam[-1]), window.L, window.U)
