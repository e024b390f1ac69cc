"""Dense Hermitian operators on small multipartite Hilbert spaces.

Basis convention: computational product basis with party 1 most significant,
so the 0-based index of ``|a_1 a_2 ... a_k>`` is ``sum_i a_i * prod_{j>i} d_j``.
For three qubits this puts ``|000>`` at index 0 and ``|111>`` at index 7
(``rho_11`` and ``rho_88`` in 1-based notation).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionError, InputError, NotHermitianError

MAX_PARTIES = 4
MAX_TOTAL_DIM = 64
SYMMETRIZE_TOL = 1e-9


@dataclass(frozen=True)
class DimensionProfile:
    """Local dimensions ``(d_1, ..., d_k)`` of a multipartite system."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if not dims:
            raise DimensionError("dimension profile needs at least one party")
        if any(d < 2 for d in dims):
            raise DimensionError(f"local dimensions must be >= 2, got {dims}")
        if len(dims) > MAX_PARTIES or int(np.prod(dims)) > MAX_TOTAL_DIM:
            raise DimensionError(
                f"profile {dims} exceeds desk-scale limits "
                f"(<= {MAX_PARTIES} parties, D <= {MAX_TOTAL_DIM})"
            )

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    @property
    def parties(self) -> int:
        return len(self.dims)

    def check_party(self, party: int) -> int:
        if not 0 <= party < self.parties:
            raise DimensionError(f"party index {party} out of range for {self.dims}")
        return party

    def __iter__(self):
        return iter(self.dims)

    def __len__(self):
        return len(self.dims)


def as_profile(dims) -> DimensionProfile:
    if isinstance(dims, DimensionProfile):
        return dims
    if isinstance(dims, (int, np.integer)):
        return DimensionProfile((int(dims),))
    return DimensionProfile(tuple(dims))


class HermitianOperator:
    """Immutable Hermitian matrix tagged with a dimension profile.

    Inputs whose anti-Hermitian part is below ``SYMMETRIZE_TOL`` (max-norm)
    are symmetrized; anything larger is rejected.
    """

    __slots__ = ("_matrix", "profile")

    def __init__(self, matrix, dims):
        profile = as_profile(dims)
        m = np.array(matrix, dtype=complex)
        D = profile.total
        if m.shape != (D, D):
            raise DimensionError(f"matrix shape {m.shape} does not match profile {profile.dims}")
        if not np.all(np.isfinite(m)):
            raise InputError("operator has non-finite entries")
        asym = np.max(np.abs(m - m.conj().T)) if D else 0.0
        if asym > SYMMETRIZE_TOL:
            raise NotHermitianError(f"matrix is not Hermitian (asymmetry {asym:.3g})")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        self._matrix = m
        self.profile = profile

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dims(self) -> tuple[int, ...]:
        return self.profile.dims

    @property
    def D(self) -> int:
        return self.profile.total

    def trace(self) -> float:
        return float(np.trace(self._matrix).real)

    def expectation(self, other: "HermitianOperator | np.ndarray") -> float:
        """``tr[self @ other]`` for a Hermitian ``other`` (always real)."""
        b = other.matrix if isinstance(other, HermitianOperator) else np.asarray(other)
        if isinstance(other, HermitianOperator):
            _require_same_profile(self, other)
        return float(np.einsum("ij,ji->", self._matrix, b).real)

    def _like(self, matrix) -> "HermitianOperator":
        return HermitianOperator(matrix, self.profile)

    def __add__(self, other):
        if not isinstance(other, HermitianOperator):
            return NotImplemented
        _require_same_profile(self, other)
        return HermitianOperator(self._matrix + other._matrix, self.profile)

    def __sub__(self, other):
        if not isinstance(other, HermitianOperator):
            return NotImplemented
        _require_same_profile(self, other)
        return HermitianOperator(self._matrix - other._matrix, self.profile)

    def __mul__(self, scalar):
        if not np.isscalar(scalar) or np.iscomplexobj(scalar):
            return NotImplemented
        return HermitianOperator(self._matrix * float(scalar), self.profile)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def __neg__(self):
        return HermitianOperator(-self._matrix, self.profile)

    def __repr__(self):
        return f"{type(self).__name__}(dims={self.dims}, trace={self.trace():.6g})"


def _require_same_profile(a: HermitianOperator, b: HermitianOperator):
    if a.dims != b.dims:
        raise DimensionError(f"profile mismatch: {a.dims} vs {b.dims}")


def identity(dims) -> HermitianOperator:
    profile = as_profile(dims)
    return HermitianOperator(np.eye(profile.total), profile)


def maximally_mixed(dims) -> HermitianOperator:
    profile = as_profile(dims)
    return HermitianOperator(np.eye(profile.total) / profile.total, profile)


def projector(amplitudes, dims) -> HermitianOperator:
    v = np.asarray(amplitudes, dtype=complex)
    return HermitianOperator(np.outer(v, v.conj()), dims)


def tensor(a: HermitianOperator, b: HermitianOperator) -> HermitianOperator:
    """Kronecker product; the profile is the concatenation of both profiles."""
    profile = DimensionProfile(a.dims + b.dims)
    return HermitianOperator(np.kron(a.matrix, b.matrix), profile)


def _as_tensor(a: HermitianOperator) -> np.ndarray:
    return a.matrix.reshape(a.dims + a.dims)


def partial_transpose(a: HermitianOperator, party: int) -> HermitianOperator:
    k = a.profile.parties
    a.profile.check_party(party)
    t = np.swapaxes(_as_tensor(a), party, k + party)
    return a._like(t.reshape(a.D, a.D))


def partial_trace(a: HermitianOperator, party: int) -> HermitianOperator:
    """Trace out ``party``; the result lives on the remaining parties."""
    k = a.profile.parties
    a.profile.check_party(party)
    if k == 1:
        raise DimensionError("cannot trace out the only party")
    t = np.trace(_as_tensor(a), axis1=party, axis2=k + party)
    rest = tuple(d for i, d in enumerate(a.dims) if i != party)
    n = int(np.prod(rest))
    return HermitianOperator(t.reshape(n, n), rest)


def permute_parties(a: HermitianOperator, order: Sequence[int]) -> HermitianOperator:
    """Reorder tensor factors so that new party ``i`` is old party ``order[i]``."""
    k = a.profile.parties
    order = tuple(order)
    if sorted(order) != list(range(k)):
        raise DimensionError(f"{order} is not a permutation of {k} parties")
    t = np.transpose(_as_tensor(a), order + tuple(k + i for i in order))
    dims = tuple(a.dims[i] for i in order)
    return HermitianOperator(t.reshape(a.D, a.D), dims)


def eigh(a: HermitianOperator) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvector columns."""
    return np.linalg.eigh(a.matrix)


def eigvalsh(a: HermitianOperator) -> np.ndarray:
    return np.linalg.eigvalsh(a.matrix)


def is_psd(a: HermitianOperator, tol: float = 1e-10) -> bool:
    return bool(eigvalsh(a)[0] >= -tol)


def pauli_matrices() -> list[np.ndarray]:
    return [
        np.array([[0, 1], [1, 0]], dtype=complex),
        np.array([[0, -1j], [1j, 0]], dtype=complex),
        np.array([[1, 0], [0, -1]], dtype=complex),
    ]


@lru_cache(maxsize=None)
def local_basis(d: int) -> np.ndarray:
    """Identity followed by the generalized Gell-Mann matrices of dimension ``d``.

    Order: identity, symmetric, antisymmetric, diagonal. Every Gell-Mann
    element has Hilbert-Schmidt norm squared 2, so at ``d = 2`` this is
    ``(I, X, Y, Z)``.
    """
    mats = [np.eye(d, dtype=complex)]
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = m[k, j] = 1
        mats.append(m)
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = -1j
        m[k, j] = 1j
        mats.append(m)
    for l in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        m[np.arange(l), np.arange(l)] = 1
        m[l, l] = -l
        mats.append(np.sqrt(2.0 / (l * (l + 1))) * m)
    basis = np.array(mats)
    basis.setflags(write=False)
    return basis


def local_decompose(a: HermitianOperator) -> np.ndarray:
    """Coefficients of ``a`` over products of per-party local bases.

    Returns a real array of shape ``(d_1**2, ..., d_k**2)`` with
    ``c[i_1..i_k] = tr[a G] / tr[G G]`` where ``G = B_{i_1} (x) ... (x) B_{i_k}``
    and ``B`` is :func:`local_basis`, so that ``a = sum c G``.
    """
    k = a.profile.parties
    t = _as_tensor(a)
    for p, d in enumerate(a.dims):
        basis = local_basis(d)
        norms = np.einsum("nij,nji->n", basis, basis).real
        # party p's row axis is always first; its column axis sits at k - p
        t = np.tensordot(t, basis, axes=([0, k - p], [2, 1])) / norms
    return np.real_if_close(t, tol=1e6).real


def local_reconstruct(coeffs: np.ndarray, dims) -> HermitianOperator:
    """Inverse of :func:`local_decompose`."""
    profile = as_profile(dims)
    c = np.asarray(coeffs, dtype=float).reshape(-1)
    bases = [local_basis(d) for d in profile.dims]
    prods = bases[0]
    for b in bases[1:]:
        prods = np.einsum("aij,bkl->abikjl", prods, b).reshape(
            prods.shape[0] * b.shape[0], prods.shape[1] * b.shape[1], prods.shape[2] * b.shape[2]
        )
    m = np.tensordot(c, prods, axes=1)
    return HermitianOperator(m, profile)


def to_dict(a: HermitianOperator) -> dict:
    return {
        "dims": list(a.dims),
        "re": a.matrix.real.tolist(),
        "im": a.matrix.imag.tolist(),
    }


def from_dict(data: dict) -> HermitianOperator:
    try:
        dims = [int(d) for d in data["dims"]]
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed operator record: {exc}") from exc
    if re.shape != im.shape:
        raise InputError("'re' and 'im' shapes differ")
    return HermitianOperator(re + 1j * im, dims)


def load_operator(path) -> HermitianOperator:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read operator file {path}: {exc}") from exc
    return from_dict(data)


def save_operator(a: HermitianOperator, path, **extra):
    data = to_dict(a)
    data.update(extra)
    Path(path).write_text(json.dumps(data))
