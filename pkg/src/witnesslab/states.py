"""State families: Bell, isotropic, GHZ/Dicke, the magic simplex, random states."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, InputError, PreconditionError
from .operators import (
    DimensionProfile,
    HermitianOperator,
    as_profile,
    eigvalsh,
    maximally_mixed,
    pauli_matrices,
)

STATE_TOL = 1e-10
NORM_TOL = 1e-12


class DensityMatrix(HermitianOperator):
    """Hermitian operator that is PSD with unit trace (within ``STATE_TOL``)."""

    __slots__ = ()

    def __init__(self, matrix, dims):
        super().__init__(matrix, dims)
        if abs(self.trace() - 1.0) > STATE_TOL:
            raise PreconditionError(f"density matrix trace is {self.trace():.12g}, not 1")
        lam = eigvalsh(self)[0]
        if lam < -STATE_TOL:
            raise PreconditionError(f"density matrix has negative eigenvalue {lam:.3g}")

    @classmethod
    def from_operator(cls, op: HermitianOperator) -> "DensityMatrix":
        if isinstance(op, cls):
            return op
        return cls(op.matrix, op.profile)


@dataclass(frozen=True)
class PureState:
    """Unit vector on a multipartite space."""

    profile: DimensionProfile
    amplitudes: np.ndarray

    def __post_init__(self):
        profile = as_profile(self.profile)
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (profile.total,):
            raise DimensionError(f"{amps.size} amplitudes for profile {profile.dims}")
        if abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
            raise PreconditionError("pure state is not normalized")
        amps.setflags(write=False)
        object.__setattr__(self, "profile", profile)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes, dims) -> "PureState":
        v = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(as_profile(dims), v / np.linalg.norm(v))

    def density(self) -> DensityMatrix:
        v = self.amplitudes
        return DensityMatrix(np.outer(v, v.conj()), self.profile)

    def inner(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


Partition = tuple[tuple[int, ...], ...]


def fully_product(k: int) -> Partition:
    return tuple((i,) for i in range(k))


def bipartition(party: int, k: int) -> Partition:
    """``party | rest`` split, e.g. ``bipartition(1, 3) == ((1,), (0, 2))``."""
    if not 0 <= party < k:
        raise DimensionError(f"party {party} out of range for {k} parties")
    return ((party,), tuple(i for i in range(k) if i != party))


def all_parties(k: int) -> Partition:
    return (tuple(range(k)),)


def check_partition(partition: Partition, k: int) -> Partition:
    partition = tuple(tuple(int(i) for i in g) for g in partition)
    flat = sorted(i for g in partition for i in g)
    if flat != list(range(k)) or any(not g for g in partition):
        raise DimensionError(f"partition {partition} does not cover {k} parties exactly once")
    return partition


def group_dims(dims: Sequence[int], partition: Partition) -> tuple[int, ...]:
    return tuple(int(np.prod([dims[i] for i in g])) for g in partition)


def group_order(partition: Partition) -> tuple[int, ...]:
    return tuple(i for g in partition for i in g)


@dataclass(frozen=True)
class ProductVector:
    """Pure state that factorizes over the groups of ``partition``.

    ``factors[g]`` is a unit vector on the tensor product of the parties in
    ``partition[g]`` (in the listed order).
    """

    profile: DimensionProfile
    factors: tuple[np.ndarray, ...]
    partition: Partition

    def __post_init__(self):
        profile = as_profile(self.profile)
        partition = check_partition(self.partition, profile.parties)
        gd = group_dims(profile.dims, partition)
        factors = []
        for f, d in zip(self.factors, gd):
            f = np.array(f, dtype=complex).reshape(-1)
            if f.shape != (d,):
                raise DimensionError(f"factor of size {f.size} for group dimension {d}")
            if abs(np.linalg.norm(f) - 1.0) > NORM_TOL:
                raise PreconditionError("product factor is not normalized")
            f.setflags(write=False)
            factors.append(f)
        if len(factors) != len(partition):
            raise DimensionError("one factor per partition group required")
        object.__setattr__(self, "profile", profile)
        object.__setattr__(self, "partition", partition)
        object.__setattr__(self, "factors", tuple(factors))

    def vector(self) -> np.ndarray:
        """Full amplitude vector in the standard party order."""
        return product_vector(self.factors, self.profile.dims, self.partition)

    def pure_state(self) -> PureState:
        return PureState(self.profile, self.vector())

    def density(self) -> DensityMatrix:
        return self.pure_state().density()

    def to_dict(self) -> dict:
        return {
            "partition": [list(g) for g in self.partition],
            "factors": [{"re": f.real.tolist(), "im": f.imag.tolist()} for f in self.factors],
        }


def product_vector(factors, dims, partition) -> np.ndarray:
    v = np.ones(1, dtype=complex)
    for f in factors:
        v = np.kron(v, f)
    order = group_order(partition)
    if order == tuple(range(len(dims))):
        return v
    grouped = [dims[i] for i in order]
    t = v.reshape(grouped)
    # axis j of t holds party order[j]; move it back to position order[j]
    return np.moveaxis(t, range(len(order)), order).reshape(-1)


def _basis_ket(index: int, D: int) -> np.ndarray:
    v = np.zeros(D, dtype=complex)
    v[index] = 1.0
    return v


BELL_KINDS = ("phi+", "phi-", "psi+", "psi-")


def bell(kind: str) -> PureState:
    s = 1 / np.sqrt(2)
    amps = {
        "phi+": [s, 0, 0, s],
        "phi-": [s, 0, 0, -s],
        "psi+": [0, s, s, 0],
        "psi-": [0, s, -s, 0],
    }
    if kind not in amps:
        raise InputError(f"unknown Bell state {kind!r}; choose from {BELL_KINDS}")
    return PureState(DimensionProfile((2, 2)), np.array(amps[kind]))


def max_entangled(d: int) -> PureState:
    if d < 2:
        raise PreconditionError("local dimension must be >= 2")
    v = np.zeros(d * d, dtype=complex)
    v[np.arange(d) * (d + 1)] = 1 / np.sqrt(d)
    return PureState(DimensionProfile((d, d)), v)


def isotropic(family: str, t: float) -> DensityMatrix:
    """``(1 - t) |b><b| + t I/4`` with ``b = phi+`` (alpha) or ``phi-`` (beta)."""
    kinds = {"alpha": "phi+", "beta": "phi-"}
    if family not in kinds:
        raise InputError(f"isotropic family must be 'alpha' or 'beta', got {family!r}")
    if not 0.0 <= t <= 1.0:
        raise PreconditionError(f"isotropic parameter {t} outside [0, 1]")
    proj = bell(kinds[family]).density().matrix
    return DensityMatrix((1 - t) * proj + t * np.eye(4) / 4, (2, 2))


def isotropic_family(family: str) -> Callable[[float], DensityMatrix]:
    def member(t: float) -> DensityMatrix:
        return isotropic(family, t)

    member.__name__ = f"isotropic_{family}"
    return member


def ghz3() -> PureState:
    return PureState(DimensionProfile((2, 2, 2)), (_basis_ket(0, 8) + _basis_ket(7, 8)) / np.sqrt(2))


def dicke3() -> PureState:
    v = _basis_ket(1, 8) + _basis_ket(2, 8) + _basis_ket(4, 8)
    return PureState(DimensionProfile((2, 2, 2)), v / np.sqrt(3))


@dataclass(frozen=True)
class SimplexPoint:
    """Coordinates ``c`` of ``(I + sum_i c_i sigma_i (x) sigma_i) / 4``."""

    c1: float
    c2: float
    c3: float

    def __post_init__(self):
        if not all(np.isfinite([self.c1, self.c2, self.c3])):
            raise InputError("simplex coordinates must be finite")

    @property
    def c(self) -> tuple[float, float, float]:
        return (self.c1, self.c2, self.c3)


def simplex_state(p: SimplexPoint) -> HermitianOperator:
    m = np.eye(4, dtype=complex)
    for ci, s in zip(p.c, pauli_matrices()):
        m = m + ci * np.kron(s, s)
    return HermitianOperator(m / 4, (2, 2))


def simplex_coordinates(rho: HermitianOperator) -> tuple[float, float, float]:
    if rho.dims != (2, 2):
        raise DimensionError("simplex coordinates need a two-qubit operator")
    return tuple(rho.expectation(np.kron(s, s)) for s in pauli_matrices())


def _exact(x) -> Fraction:
    # decimal reading of the float, so 0.4 + 0.3 + 0.3 sums to exactly 1
    return Fraction(repr(float(x))) if not isinstance(x, Fraction) else x


def simplex_classify(p: SimplexPoint) -> str:
    """``'nonphysical'``, ``'separable'`` or ``'entangled'``.

    Separability uses the octahedron condition ``|c1| + |c2| + |c3| <= 1``
    evaluated in exact rational arithmetic.
    """
    if eigvalsh(simplex_state(p))[0] < -STATE_TOL:
        return "nonphysical"
    if sum(abs(_exact(x)) for x in p.c) <= 1:
        return "separable"
    return "entangled"


def _gaussian_unit(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_pure(dims, seed: int) -> PureState:
    profile = as_profile(dims)
    rng = np.random.default_rng(seed)
    return PureState(profile, _gaussian_unit(rng, profile.total))


def random_product(dims, seed: int, partition: Partition | None = None) -> ProductVector:
    """Haar-random factor on every group of ``partition`` (fully product by default)."""
    profile = as_profile(dims)
    partition = fully_product(profile.parties) if partition is None else partition
    partition = check_partition(partition, profile.parties)
    rng = np.random.default_rng(seed)
    factors = tuple(_gaussian_unit(rng, d) for d in group_dims(profile.dims, partition))
    return ProductVector(profile, factors, partition)


def random_density(dims, seed: int, rank: int | None = None) -> DensityMatrix:
    """Random mixed state ``G G^dagger / tr`` with Gaussian ``G`` of the given rank."""
    profile = as_profile(dims)
    rng = np.random.default_rng(seed)
    r = profile.total if rank is None else rank
    g = rng.standard_normal((profile.total, r)) + 1j * rng.standard_normal((profile.total, r))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real, profile)


def maximally_mixed_state(dims) -> DensityMatrix:
    return DensityMatrix.from_operator(maximally_mixed(dims))
