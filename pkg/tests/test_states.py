import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from witnesslab.errors import InputError, PreconditionError
from witnesslab.operators import eigvalsh, partial_trace
from witnesslab.states import (
    DensityMatrix,
    ProductVector,
    PureState,
    SimplexPoint,
    bell,
    bipartition,
    dicke3,
    ghz3,
    isotropic,
    max_entangled,
    product_vector,
    random_density,
    random_product,
    random_pure,
    simplex_classify,
    simplex_coordinates,
    simplex_state,
)

S = 1 / np.sqrt(2)


class TestDensityMatrix:
    def test_rejects_trace(self):
        with pytest.raises(PreconditionError):
            DensityMatrix(np.eye(2), (2,))

    def test_rejects_negative(self):
        with pytest.raises(PreconditionError):
            DensityMatrix(np.diag([1.5, -0.5]), (2,))

    def test_pure_normalization(self):
        with pytest.raises(PreconditionError):
            PureState((2,), [1, 1])
        assert PureState.normalized([1, 1], (2,)).amplitudes[0] == pytest.approx(S)


class TestBell:
    def test_amplitudes(self):
        assert np.allclose(bell("phi+").amplitudes, [S, 0, 0, S])
        assert np.allclose(bell("phi-").amplitudes, [S, 0, 0, -S])

    def test_orthonormal(self):
        kinds = ["phi+", "phi-", "psi+", "psi-"]
        gram = np.array([[bell(a).inner(bell(b)) for b in kinds] for a in kinds])
        assert np.allclose(gram, np.eye(4))

    def test_unknown(self):
        with pytest.raises(InputError):
            bell("chi")


class TestMaxEntangled:
    def test_qubit_is_phi_plus(self):
        assert np.allclose(max_entangled(2).amplitudes, bell("phi+").amplitudes)

    def test_qutrit(self):
        v = max_entangled(3).amplitudes
        assert np.allclose(v[[0, 4, 8]], 1 / np.sqrt(3))
        assert np.count_nonzero(v) == 3
        rho = max_entangled(3).density()
        for p in (0, 1):
            assert np.allclose(partial_trace(rho, p).matrix, np.eye(3) / 3)

    def test_small(self):
        with pytest.raises(PreconditionError):
            max_entangled(1)


class TestIsotropic:
    def test_endpoints(self):
        assert np.allclose(isotropic("alpha", 0).matrix, bell("phi+").density().matrix)
        assert np.allclose(isotropic("alpha", 1).matrix, np.eye(4) / 4)

    def test_beta_coordinates(self):
        assert np.allclose(simplex_coordinates(isotropic("beta", 0.5)), (-0.5, 0.5, 0.5))

    @pytest.mark.parametrize("family", ["alpha", "beta"])
    def test_affine(self, family):
        mid = isotropic(family, 0.5).matrix
        ends = (isotropic(family, 0).matrix + isotropic(family, 1).matrix) / 2
        assert np.array_equal(mid, ends)

    def test_range(self):
        with pytest.raises(PreconditionError):
            isotropic("alpha", 1.5)
        with pytest.raises(InputError):
            isotropic("gamma", 0.5)


class TestThreeQubit:
    def test_ghz(self):
        m = ghz3().density().matrix
        assert m[0, 0] == m[7, 7] == m[0, 7] == pytest.approx(0.5)
        assert np.count_nonzero(np.abs(m) > 1e-15) == 4

    def test_dicke(self):
        m = dicke3().density().matrix
        for i, j in [(1, 1), (2, 2), (4, 4), (1, 2), (1, 4), (2, 4)]:
            assert m[i, j] == pytest.approx(1 / 3)

    def test_orthogonal(self):
        assert ghz3().inner(dicke3()) == 0


class TestSimplex:
    def test_origin(self):
        assert np.allclose(simplex_state(SimplexPoint(0, 0, 0)).matrix, np.eye(4) / 4)

    def test_phi_plus_vertex(self):
        assert np.allclose(simplex_state(SimplexPoint(1, -1, 1)).matrix, bell("phi+").density().matrix)

    def test_swap_nonphysical(self):
        lam = eigvalsh(simplex_state(SimplexPoint(1, 1, 1)))
        assert np.allclose(lam, [-0.5, 0.5, 0.5, 0.5])

    @pytest.mark.parametrize(
        "c, kind",
        [
            ((0, 0, 0), "separable"),
            ((1, -1, 1), "entangled"),
            ((0.4, -0.3, 0.2), "separable"),
            ((1, 1, 1), "nonphysical"),
            ((0.4, 0.3, -0.3), "separable"),  # |c|-sum is exactly 1
            ((-0.6, 0.6, 0.6), "entangled"),
        ],
    )
    def test_classify(self, c, kind):
        assert simplex_classify(SimplexPoint(*c)) == kind

    @given(st.tuples(*[st.floats(-1, 1)] * 3))
    def test_classify_consistent(self, c):
        kind = simplex_classify(SimplexPoint(*c))
        lam = eigvalsh(simplex_state(SimplexPoint(*c)))[0]
        assert (kind == "nonphysical") == (lam < -1e-10)

    @given(st.tuples(*[st.floats(-1, 1)] * 3))
    def test_coordinates_roundtrip(self, c):
        assert np.allclose(simplex_coordinates(simplex_state(SimplexPoint(*c))), c, atol=1e-14)

    def test_nonfinite(self):
        with pytest.raises(InputError):
            SimplexPoint(np.inf, 0, 0)


class TestRandom:
    def test_deterministic(self):
        assert np.array_equal(random_pure((2, 3), 7).amplitudes, random_pure((2, 3), 7).amplitudes)
        a, b = random_product((2, 2, 2), 7), random_product((2, 2, 2), 7)
        assert all(np.array_equal(x, y) for x, y in zip(a.factors, b.factors))

    def test_factor_norms(self):
        pv = random_product((2, 3, 2), 11)
        for f in pv.factors:
            assert abs(np.linalg.norm(f) - 1) <= 1e-12

    def test_haar_moment(self):
        vals = [abs(random_pure((2,), s).amplitudes[0]) ** 2 for s in range(10_000)]
        assert np.mean(vals) == pytest.approx(0.5, abs=0.02)

    def test_random_density(self):
        rho = random_density((2, 2, 2), 3)
        assert rho.trace() == pytest.approx(1)
        assert eigvalsh(rho)[0] >= -1e-12


class TestProductVector:
    def test_bipartition_layout(self):
        # party 1 alone against parties 0 and 2 grouped
        a = np.array([0, 1], dtype=complex)
        pair = bell("phi+").amplitudes
        pv = ProductVector((2, 2, 2), (a, pair), bipartition(1, 3))
        v = pv.vector().reshape(2, 2, 2)
        # |1> on party 1, phi+ shared by parties 0 and 2
        assert v[0, 1, 0] == pytest.approx(S) and v[1, 1, 1] == pytest.approx(S)
        assert np.linalg.norm(v[:, 0, :]) == 0

    def test_fully_product_is_kron(self):
        fs = [np.array([1, 0]), np.array([S, S]), np.array([0, 1])]
        v = product_vector(fs, (2, 2, 2), ((0,), (1,), (2,)))
        assert np.allclose(v, np.kron(np.kron(fs[0], fs[1]), fs[2]))

    def test_bad_partition(self):
        with pytest.raises(InputError):
            random_product((2, 2, 2), 0, ((0,), (0, 1)))
