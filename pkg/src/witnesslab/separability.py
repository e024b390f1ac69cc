"""Optimization of functionals over separable (product) states.

Linear functionals ``tr[A sigma]`` are extremized over pure product states,
which are the extreme points of the separable set. All solvers here are
inner bounds: a reported maximum never exceeds the true one.

Restarts are independent; restart ``r`` draws from ``default_rng(seed + r)``
and results are merged in restart order, so outputs do not depend on the
number of worker threads (``WITNESS_LAB_THREADS``).
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import DimensionError, PreconditionError
from .operators import HermitianOperator, as_profile, eigvalsh, permute_parties
from .states import (
    Partition,
    ProductVector,
    all_parties,
    bipartition,
    check_partition,
    fully_product,
    group_dims,
    group_order,
    product_vector,
    random_product,
)

TIE_TOL = 1e-12
DINKELBACH_TOL = 1e-10
MAX_GRID_POINTS = 20_000_000


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 64
    tol: float = 1e-10
    max_iter: int = 500
    seed: int = 0
    resolution: int = 24
    mixture_rank: int = 1
    threads: int | None = None

    def __post_init__(self):
        if self.restarts < 1:
            raise PreconditionError("restarts must be >= 1")
        if self.resolution < 4:
            raise PreconditionError("grid resolution must be >= 4")
        if self.mixture_rank < 1:
            raise PreconditionError("mixture_rank must be >= 1")

    def replace(self, **changes) -> "OptimizerConfig":
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        values.update(changes)
        return OptimizerConfig(**values)


@dataclass(frozen=True)
class MixtureCertificate:
    """Convex combination of product vectors."""

    weights: tuple[float, ...]
    components: tuple[ProductVector, ...]

    def matrix(self) -> np.ndarray:
        out = 0
        for w, c in zip(self.weights, self.components):
            v = c.vector()
            out = out + w * np.outer(v, v.conj())
        return out

    def to_dict(self) -> dict:
        return {
            "weights": list(self.weights),
            "components": [c.to_dict() for c in self.components],
        }


def certificate_matrix(cert) -> np.ndarray:
    if isinstance(cert, MixtureCertificate):
        return cert.matrix()
    v = cert.vector()
    return np.outer(v, v.conj())


@dataclass
class ExtremumResult:
    value: float
    certificate: ProductVector | MixtureCertificate
    mode: str
    restart: int
    converged: bool
    iterations: int
    traces: list[list[float]] = field(default_factory=list, repr=False)
    extra: dict = field(default_factory=dict)

    def metadata(self) -> dict:
        return {
            "mode": self.mode,
            "best_restart": self.restart,
            "converged": self.converged,
            "iterations": self.iterations,
            "restarts": len(self.traces),
            **self.extra,
        }


@dataclass
class SeparabilityWindow:
    L: float
    U: float
    min_certificate: ProductVector | MixtureCertificate | None = None
    max_certificate: ProductVector | MixtureCertificate | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.L > self.U + 1e-12:
            raise PreconditionError(f"window lower bound {self.L} exceeds upper bound {self.U}")

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.L - tol <= value <= self.U + tol

    def to_dict(self) -> dict:
        out = {"L": self.L, "U": self.U}
        if self.min_certificate is not None:
            out["min_certificate"] = self.min_certificate.to_dict()
        if self.max_certificate is not None:
            out["max_certificate"] = self.max_certificate.to_dict()
        if self.metadata:
            out["metadata"] = self.metadata
        return out


def _check_mode(mode: str) -> str:
    if mode not in ("min", "max"):
        raise PreconditionError(f"mode must be 'min' or 'max', got {mode!r}")
    return mode


def _better(mode: str, new: float, old: float) -> bool:
    return new < old - TIE_TOL if mode == "min" else new > old + TIE_TOL


def _thread_count(cfg: OptimizerConfig) -> int:
    if cfg.threads is not None:
        return max(1, cfg.threads)
    try:
        return max(1, int(os.environ.get("WITNESS_LAB_THREADS", "1")))
    except ValueError:
        return 1


def _map_restarts(fn: Callable[[int], tuple], cfg: OptimizerConfig) -> list:
    n = _thread_count(cfg)
    if n == 1:
        return [fn(r) for r in range(cfg.restarts)]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, range(cfg.restarts)))


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Make the first non-negligible amplitude real positive."""
    idx = np.flatnonzero(np.abs(v) > 1e-9)
    if idx.size == 0:
        return v
    z = v[idx[0]]
    return v * (np.conj(z) / abs(z))


def _grouped(a: HermitianOperator, partition: Partition) -> tuple[np.ndarray, tuple[int, ...]]:
    order = group_order(partition)
    if order != tuple(range(a.profile.parties)):
        a = permute_parties(a, order)
    gd = group_dims(a.dims, partition)
    return a.matrix.reshape(gd + gd), gd


def _local_subscripts(m: int) -> list[str]:
    rows = "abcd"[:m]
    cols = "efgh"[:m]
    subs = []
    for j in range(m):
        others = [i for i in range(m) if i != j]
        ops = [rows[i] for i in others] + [rows + cols] + [cols[i] for i in others]
        subs.append(",".join(ops) + "->" + rows[j] + cols[j])
    return subs


def _expect(t: np.ndarray, factors: Sequence[np.ndarray]) -> float:
    v = factors[0]
    for f in factors[1:]:
        v = np.kron(v, f)
    D = v.size
    return float(np.vdot(v, t.reshape(D, D) @ v).real)


def _seesaw_run(t, factors, mode, tol, max_iter):
    m = len(factors)
    factors = list(factors)
    pick = 0 if mode == "min" else -1
    trace = [_expect(t, factors)]
    if m == 1:
        w, v = np.linalg.eigh(t)
        factors[0] = v[:, pick]
        trace.append(float(w[pick]))
        return factors, trace, True
    subs = _local_subscripts(m)
    converged = False
    for _ in range(max_iter):
        for j in range(m):
            others = [factors[i] for i in range(m) if i != j]
            local = np.einsum(subs[j], *[f.conj() for f in others], t, *others)
            w, v = np.linalg.eigh(0.5 * (local + local.conj().T))
            factors[j] = v[:, pick]
            val = float(w[pick])
        prev = trace[-1]
        trace.append(val)
        if abs(val - prev) <= tol * max(1.0, abs(val)):
            converged = True
            break
    return factors, trace, converged


def _finish(a, partition, factors) -> ProductVector:
    return ProductVector(a.profile, tuple(fix_phase(f) for f in factors), partition)


def _evaluate(a: HermitianOperator, cert) -> float:
    return a.expectation(certificate_matrix(cert))


def seesaw_extremum(
    a: HermitianOperator,
    mode: str,
    cfg: OptimizerConfig | None = None,
    partition: Partition | None = None,
) -> ExtremumResult:
    """Extremize ``tr[a sigma]`` over pure states factorizing along ``partition``.

    Cyclic see-saw: with all groups but one fixed, ``a`` contracts to a local
    Hermitian operator whose extremal eigenvector is the optimal update.
    """
    cfg = cfg or OptimizerConfig()
    _check_mode(mode)
    k = a.profile.parties
    partition = check_partition(fully_product(k) if partition is None else partition, k)
    t, _ = _grouped(a, partition)

    def run(r):
        start = random_product(a.profile, cfg.seed + r, partition)
        return _seesaw_run(t, start.factors, mode, cfg.tol, cfg.max_iter)

    runs = _map_restarts(run, cfg)
    best = 0
    for r in range(1, len(runs)):
        if _better(mode, runs[r][1][-1], runs[best][1][-1]):
            best = r
    factors, trace, converged = runs[best]
    cert = _finish(a, partition, factors)
    return ExtremumResult(
        value=_evaluate(a, cert),
        certificate=cert,
        mode=mode,
        restart=best,
        converged=converged,
        iterations=len(trace) - 1,
        traces=[run[1] for run in runs],
        extra={"method": "seesaw", "all_converged": all(run[2] for run in runs)},
    )


def separability_window(
    a: HermitianOperator,
    cfg: OptimizerConfig | None = None,
    partition: Partition | None = None,
) -> SeparabilityWindow:
    """``[L, U]`` of ``tr[a sigma]`` over (partition-)separable states."""
    lo = seesaw_extremum(a, "min", cfg, partition)
    hi = seesaw_extremum(a, "max", cfg, partition)
    return SeparabilityWindow(
        L=lo.value,
        U=hi.value,
        min_certificate=lo.certificate,
        max_certificate=hi.certificate,
        metadata={"min": lo.metadata(), "max": hi.metadata()},
    )


def _angles_to_vector(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Hyperspherical amplitudes; ``theta`` in [0, pi] halves to [0, pi/2].

    For a qubit this is ``(cos(theta/2), e^{i phi} sin(theta/2))``.
    Works on batches: ``theta``/``phi`` have shape ``(..., d - 1)``.
    """
    half = 0.5 * theta
    d = theta.shape[-1] + 1
    mags = np.ones(theta.shape[:-1] + (d,))
    for i in range(d - 1):
        mags[..., i] *= np.cos(half[..., i])
        mags[..., i + 1 :] *= np.sin(half[..., i : i + 1])
    phases = np.concatenate([np.zeros(theta.shape[:-1] + (1,)), phi], axis=-1)
    return mags * np.exp(1j * phases)


def grid_oracle(
    a: HermitianOperator,
    mode: str,
    cfg: OptimizerConfig | None = None,
    partition: Partition | None = None,
) -> ExtremumResult:
    """Exhaustive angle grid over product states, then one see-saw refinement.

    Independent check for :func:`seesaw_extremum`; the total number of real
    parameters ``sum 2 (d_g - 1)`` must not exceed 8.
    """
    cfg = cfg or OptimizerConfig()
    _check_mode(mode)
    k = a.profile.parties
    partition = check_partition(fully_product(k) if partition is None else partition, k)
    t, gd = _grouped(a, partition)
    n_params = sum(2 * (d - 1) for d in gd)
    if n_params > 8:
        raise PreconditionError(f"grid oracle needs <= 8 real parameters, got {n_params}")
    res = cfg.resolution
    if res**n_params > MAX_GRID_POINTS:
        raise PreconditionError(f"grid of {res}^{n_params} points is too large")

    thetas = np.linspace(0.0, np.pi, res)
    phis = np.linspace(0.0, 2 * np.pi, res, endpoint=False)
    local_sets = []
    for d in gd:
        grid = np.array(list(itertools.product(*([thetas] * (d - 1) + [phis] * (d - 1)))))
        local_sets.append(_angles_to_vector(grid[:, : d - 1], grid[:, d - 1 :]))

    D = int(np.prod(gd))
    A = t.reshape(D, D)
    # enumerate the first group in chunks; the remaining groups are expanded fully
    rest = np.ones((1, 1), dtype=complex)
    for s in local_sets[1:]:
        rest = np.einsum("ni,mj->nmij", rest, s).reshape(rest.shape[0] * s.shape[0], -1)
    first = local_sets[0]
    chunk = max(1, 4_000_000 // max(1, rest.shape[0] * D))
    best_val = np.inf if mode == "min" else -np.inf
    best_idx = None
    for start in range(0, first.shape[0], chunk):
        block = first[start : start + chunk]
        psi = np.einsum("ni,mj->nmij", block, rest).reshape(-1, D)
        vals = np.einsum("ni,ij,nj->n", psi.conj(), A, psi).real
        i = int(np.argmin(vals) if mode == "min" else np.argmax(vals))
        if _better(mode, vals[i], best_val):
            best_val = float(vals[i])
            best_idx = (start + i // rest.shape[0], i % rest.shape[0])

    factors = [first[best_idx[0]]]
    sizes = [s.shape[0] for s in local_sets[1:]]
    if sizes:
        for idx, s in zip(np.unravel_index(best_idx[1], sizes), local_sets[1:]):
            factors.append(s[idx])

    factors, trace, converged = _seesaw_run(t, factors, mode, cfg.tol, cfg.max_iter)
    cert = _finish(a, partition, factors)
    return ExtremumResult(
        value=_evaluate(a, cert),
        certificate=cert,
        mode=mode,
        restart=0,
        converged=converged,
        iterations=len(trace) - 1,
        traces=[trace],
        extra={"method": "grid_oracle", "grid_value": best_val, "resolution": res},
    )


def ratio_extremum(
    a: HermitianOperator,
    b: HermitianOperator,
    mode: str,
    cfg: OptimizerConfig | None = None,
    partition: Partition | None = None,
    max_rounds: int = 60,
) -> ExtremumResult:
    """Extremal ``tr[a sigma] / tr[b sigma]`` over product states (Dinkelbach).

    Each round solves the linear problem ``ext tr[(a - t b) sigma]`` by
    see-saw and moves ``t`` to the ratio at the optimizer; it stops when
    the linear optimum is within ``1e-10`` of zero.
    """
    cfg = cfg or OptimizerConfig()
    _check_mode(mode)
    if a.dims != b.dims:
        raise DimensionError(f"profile mismatch: {a.dims} vs {b.dims}")
    if eigvalsh(b)[0] <= 1e-12:
        raise PreconditionError("denominator operator must be positive definite")

    def ratio(cert):
        rho = certificate_matrix(cert)
        return a.expectation(rho) / b.expectation(rho)

    k = a.profile.parties
    cert = random_product(a.profile, cfg.seed, partition or fully_product(k))
    t = ratio(cert)
    rounds = []
    converged = False
    for _ in range(max_rounds):
        res = seesaw_extremum(a - t * b, mode, cfg, partition)
        rounds.append({"t": t, "g": res.value})
        t_new = ratio(res.certificate)
        improved = _better(mode, t_new, t)
        if improved:
            cert, t = res.certificate, t_new
        if abs(res.value) <= DINKELBACH_TOL:
            converged = True
            break
        if not improved:
            break
    value = ratio(cert)
    return ExtremumResult(
        value=value,
        certificate=cert,
        mode=mode,
        restart=0,
        converged=converged,
        iterations=len(rounds),
        traces=[[r["t"] for r in rounds]],
        extra={"method": "dinkelbach", "rounds": rounds},
    )


def project_simplex(w: np.ndarray) -> np.ndarray:
    u = np.sort(w)[::-1]
    css = np.cumsum(u)
    rho = np.nonzero(u * np.arange(1, w.size + 1) > (css - 1))[0][-1]
    theta = (css[rho] - 1) / (rho + 1.0)
    return np.maximum(w - theta, 0.0)


class _Parameterization:
    """Angle parameters of ``rank`` product vectors plus mixture weights."""

    def __init__(self, dims, partition, rank):
        self.dims = tuple(dims)
        self.partition = partition
        self.gd = group_dims(self.dims, partition)
        self.rank = rank
        self.block = sum(2 * (d - 1) for d in self.gd)
        self.size = rank * self.block + (rank if rank > 1 else 0)

    def initial(self, rng) -> np.ndarray:
        x = []
        for _ in range(self.rank):
            for d in self.gd:
                x.extend(rng.uniform(0, np.pi, d - 1))
                x.extend(rng.uniform(0, 2 * np.pi, d - 1))
        if self.rank > 1:
            x.extend(np.full(self.rank, 1.0 / self.rank))
        return np.array(x)

    def factors(self, x, r) -> list[np.ndarray]:
        out = []
        pos = r * self.block
        for d in self.gd:
            theta = x[pos : pos + d - 1]
            phi = x[pos + d - 1 : pos + 2 * (d - 1)]
            out.append(_angles_to_vector(theta, phi))
            pos += 2 * (d - 1)
        return out

    def weights(self, x) -> np.ndarray:
        if self.rank == 1:
            return np.ones(1)
        return project_simplex(x[self.rank * self.block :])

    def density(self, x) -> np.ndarray:
        rho = 0
        for r, w in enumerate(self.weights(x)):
            if w == 0:
                continue
            v = product_vector(self.factors(x, r), self.dims, self.partition)
            rho = rho + w * np.outer(v, v.conj())
        return rho

    def certificate(self, x, profile):
        comps = tuple(
            ProductVector(profile, tuple(fix_phase(f) for f in self.factors(x, r)), self.partition)
            for r in range(self.rank)
        )
        if self.rank == 1:
            return comps[0]
        w = self.weights(x)
        keep = [i for i in range(self.rank) if w[i] > 0]
        return MixtureCertificate(tuple(float(w[i]) for i in keep), tuple(comps[i] for i in keep))


def nonlinear_extremum(
    f: Callable[[np.ndarray], float],
    dims,
    mode: str,
    cfg: OptimizerConfig | None = None,
    partition: Partition | None = None,
) -> ExtremumResult:
    """Extremize a real functional of the density matrix over product states.

    ``f`` receives a ``D x D`` numpy array. The search runs Powell's
    derivative-free line-search method over the angle parameterization of
    (partition-)product vectors, from ``cfg.restarts`` random starts. With
    ``cfg.mixture_rank > 1`` it searches convex combinations of that many
    product vectors, weights projected onto the simplex.
    """
    cfg = cfg or OptimizerConfig()
    _check_mode(mode)
    profile = as_profile(dims)
    k = profile.parties
    partition = check_partition(fully_product(k) if partition is None else partition, k)
    param = _Parameterization(profile.dims, partition, cfg.mixture_rank)
    sign = 1.0 if mode == "min" else -1.0

    def objective(x):
        return sign * float(f(param.density(x)))

    def run(r):
        rng = np.random.default_rng(cfg.seed + r)
        res = minimize(
            objective,
            param.initial(rng),
            method="Powell",
            options={
                "xtol": 1e-9,
                "ftol": 1e-13,
                "maxiter": cfg.max_iter * 10,
                "maxfev": 2000 * param.size,
            },
        )
        return res.x, sign * float(res.fun), bool(res.success), int(res.nfev)

    runs = _map_restarts(run, cfg)
    best = 0
    for r in range(1, len(runs)):
        if _better(mode, runs[r][1], runs[best][1]):
            best = r
    x, _, success, _ = runs[best]
    cert = param.certificate(x, profile)
    value = float(f(certificate_matrix(cert)))
    return ExtremumResult(
        value=value,
        certificate=cert,
        mode=mode,
        restart=best,
        converged=success,
        iterations=runs[best][3],
        traces=[[run[1]] for run in runs],
        extra={"method": "powell", "mixture_rank": cfg.mixture_rank},
    )


def functional_extremum(f, dims, mode, cfg=None, partition=None) -> ExtremumResult:
    """Dispatch: see-saw for a linear functional (an operator), Powell otherwise."""
    if isinstance(f, HermitianOperator):
        return seesaw_extremum(f, mode, cfg, partition)
    return nonlinear_extremum(f, dims, mode, cfg, partition)


def biseparable_extremum(f, mode: str, cfg: OptimizerConfig | None = None, dims=(2, 2, 2)):
    """Best value over the three single-party-cut classes of pure biseparable states."""
    profile = as_profile(dims)
    if profile.parties != 3:
        raise DimensionError("biseparable search is implemented for three parties")
    results = [functional_extremum(f, profile, mode, cfg, bipartition(i, 3)) for i in range(3)]
    best = 0
    for i in range(1, 3):
        if _better(mode, results[i].value, results[best].value):
            best = i
    out = results[best]
    out.extra = dict(out.extra, cut=best, per_cut=[r.value for r in results])
    return out


def biseparable_min(f, cfg: OptimizerConfig | None = None, dims=(2, 2, 2)) -> ExtremumResult:
    """Minimum over pure states of the form ``|a>|bc>`` for every cut ``a|bc``.

    Valid over the whole biseparable set for functionals that are concave
    in the state (linear ones included): minima sit at extreme points.
    """
    return biseparable_extremum(f, "min", cfg, dims)


def all_pure_extremum(f, dims, mode, cfg=None) -> ExtremumResult:
    profile = as_profile(dims)
    return functional_extremum(f, profile, mode, cfg, all_parties(profile.parties))
