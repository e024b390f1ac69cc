import numpy as np
import pytest

from witnesslab.catalog import choi3_compressed, ew2_compressed
from witnesslab.errors import NotAWitnessError, PreconditionError
from witnesslab.operators import HermitianOperator, eigvalsh, maximally_mixed
from witnesslab.separability import OptimizerConfig
from witnesslab.spa import (
    MirrorPair,
    compress,
    is_compressed,
    mirror_identity_residual,
    mirror_pair,
    prop2_bounds,
    spa_minus,
    spa_plus,
    xpa,
)
from witnesslab.witnesses import Witness, builtin

EQ8 = np.array([[2, 0, 0, -2], [0, 3, 0, 0], [0, 0, 3, 0], [-2, 0, 0, 2]]) / 10
SEPARABLE_X = HermitianOperator(np.diag([0.4, 0.1, 0.1, 0.4]), (2, 2))
CFG = OptimizerConfig(restarts=16)


@pytest.fixture(scope="module")
def ew2_pair():
    return compress(builtin("ew2q:plus"), cfg=CFG)


@pytest.fixture(scope="module")
def choi_pair():
    return compress(builtin("choi3"), cfg=CFG)


def _lam_min(w, x, t):
    return eigvalsh((1 - t) * w + t * x)[0]


class TestSpaPlus:
    def test_example(self):
        res = spa_plus(builtin("ew2q:plus"))
        assert res.weight == pytest.approx(0.6, abs=1e-9)
        assert np.max(np.abs(res.mixed.matrix - EQ8)) <= 1e-12
        assert res.method == "closed_form"
        assert res.crosscheck == pytest.approx(0.6, abs=1e-9)

    def test_choi(self):
        res = spa_plus(builtin("choi3"))
        assert res.weight == pytest.approx(0.6, abs=1e-9)
        expected = 0.4 * builtin("choi3").matrix + np.eye(9) / 15
        assert np.allclose(res.mixed.matrix, expected, atol=1e-12)

    def test_psd_input(self):
        res = spa_plus(Witness.from_operator(SEPARABLE_X))
        assert res.weight == 0
        assert np.allclose(res.mixed.matrix, SEPARABLE_X.matrix)

    @pytest.mark.parametrize("name", ["ew2q:plus", "ew2q:minus", "choi3", "choi3:mirror"])
    def test_extremal(self, name):
        w = builtin(name)
        x = maximally_mixed(w.dims)
        res = spa_plus(w)
        if res.weight == 0:
            return
        assert -1e-10 <= eigvalsh(res.mixed)[0] <= 1e-8
        assert _lam_min(w, x, res.weight - 1e-6) < 0


class TestSpaMinus:
    def test_example(self):
        assert spa_minus(builtin("ew2q:minus")).weight == pytest.approx(1.4, abs=1e-9)

    def test_choi_mirror(self):
        res = spa_minus(builtin("choi3:mirror"))
        assert res.weight == pytest.approx(1.4, abs=1e-9)
        assert builtin("choi3:mirror").lambda_max == pytest.approx(7 / 18)

    def test_degenerate(self):
        with pytest.raises(PreconditionError, match="no finite n-SPA"):
            spa_minus(Witness.from_operator(maximally_mixed((2, 2))))

    @pytest.mark.parametrize("name", ["ew2q:plus", "ew2q:minus", "choi3", "choi3:mirror"])
    def test_extremal(self, name):
        w = builtin(name)
        res = spa_minus(w)
        assert -1e-10 <= eigvalsh(res.mixed)[0] <= 1e-8
        assert _lam_min(w, maximally_mixed(w.dims), res.weight + 1e-6) < 0
        assert res.crosscheck == pytest.approx(res.weight, abs=1e-9)


class TestXpa:
    @pytest.mark.parametrize("name", ["ew2q:plus", "choi3"])
    def test_identity_reference(self, name):
        w = builtin(name)
        x = maximally_mixed(w.dims)
        assert xpa(w, x, "positive").weight == pytest.approx(spa_plus(w).weight, abs=1e-9)
        assert xpa(w, x, "negative").weight == pytest.approx(spa_minus(w).weight, abs=1e-9)

    def test_separable_reference(self):
        res = xpa(builtin("ew2q:plus"), SEPARABLE_X, "positive")
        assert 0 < res.weight < 1
        assert -1e-10 <= eigvalsh(res.mixed)[0] <= 1e-8
        assert res.method == "bisection"

    def test_rank_deficient(self):
        x = HermitianOperator(np.diag([0.5, 0.5, 0, 0]), (2, 2))
        with pytest.raises(PreconditionError):
            xpa(builtin("ew2q:plus"), x)

    def test_trace_and_positivity(self):
        with pytest.raises(PreconditionError):
            xpa(builtin("ew2q:plus"), HermitianOperator(np.eye(4), (2, 2)))
        with pytest.raises(PreconditionError):
            xpa(builtin("ew2q:plus"), HermitianOperator(np.diag([0.7, 0.7, 0.1, -0.5]), (2, 2)))


class TestCompress:
    def test_example_one(self, ew2_pair):
        assert np.max(np.abs(ew2_pair.compressed.matrix - EQ8)) <= 1e-12
        assert np.max(np.abs(ew2_pair.w_minus.matrix - builtin("ew2q:minus").matrix)) <= 1e-6
        assert ew2_pair.window.L == pytest.approx(0.15, abs=1e-4)
        assert ew2_pair.window.U == pytest.approx(0.35, abs=1e-4)
        assert ew2_pair.p_plus == pytest.approx(0.6) and ew2_pair.p_minus == pytest.approx(1.4, abs=1e-8)
        assert not ew2_pair.trivial_upper_bound

    def test_choi(self, choi_pair):
        assert choi_pair.window.L == pytest.approx(1 / 15, abs=1e-4)
        assert choi_pair.window.U == pytest.approx(7 / 45, abs=1e-4)
        assert np.max(np.abs(choi_pair.w_minus.matrix - builtin("choi3:mirror").matrix)) <= 1e-6

    @pytest.mark.parametrize("pair_name", ["ew2_pair", "choi_pair"])
    def test_invariants(self, pair_name, request):
        pair: MirrorPair = request.getfixturevalue(pair_name)
        D = pair.x.D
        assert eigvalsh(pair.compressed)[0] >= -1e-10
        assert mirror_identity_residual(pair) <= 1e-9
        assert pair.window.L == pytest.approx(pair.p_plus / D, abs=1e-6)
        assert pair.window.U == pytest.approx(pair.p_minus / D, abs=1e-6)
        again = spa_plus(pair.w_plus, pair.x).mixed
        assert np.max(np.abs(again.matrix - pair.compressed.matrix)) <= 1e-9

    def test_psd_rejected(self):
        with pytest.raises(NotAWitnessError):
            compress(maximally_mixed((2, 2)), cfg=CFG)

    def test_border_shift(self):
        # lift ew2q:plus off the border; compression shifts it back
        lifted = builtin("ew2q:plus") + 0.02 * maximally_mixed((2, 2)) * 4
        pair = compress(lifted, cfg=CFG)
        assert pair.shift > 1e-6
        assert np.allclose(pair.w_plus.matrix, builtin("ew2q:plus").matrix, atol=1e-6)
        unshifted = compress(lifted, cfg=CFG, shift=False)
        assert unshifted.shift == 0

    def test_separable_reference(self):
        pair = compress(builtin("ew2q:plus"), SEPARABLE_X, CFG)
        assert mirror_identity_residual(pair) <= 1e-9
        assert not pair.identity_reference
        with pytest.raises(PreconditionError):
            prop2_bounds(pair, CFG)

    def test_report_dict(self, ew2_pair):
        d = ew2_pair.to_dict()
        assert {"p_plus", "p_minus", "window", "w_plus", "w_minus", "compressed", "spectra"} <= set(d)


class TestMirrorIdentity:
    def test_example_pair(self):
        pair = mirror_pair(builtin("ew2q:plus"), builtin("ew2q:minus"))
        assert mirror_identity_residual(pair) <= 1e-12

    def test_choi_pair(self):
        pair = mirror_pair(builtin("choi3"), builtin("choi3:mirror"))
        assert mirror_identity_residual(pair) <= 1e-9
        assert pair.extra["mixture_gap"] <= 1e-9

    def test_perturbed(self):
        pair = mirror_pair(builtin("ew2q:plus"), builtin("ew2q:minus"))
        m = builtin("ew2q:minus").matrix.copy()
        m[0, 0] += 0.01
        # keep the perturbation unnormalized: a Witness would rescale it away
        pair.w_minus = HermitianOperator(m, (2, 2))
        assert mirror_identity_residual(pair) >= 0.004 - 1e-12


class TestProp2:
    def test_example_one(self, ew2_pair):
        b = prop2_bounds(ew2_pair, CFG)
        assert b.U_plus == pytest.approx(0.5, abs=1e-9)
        assert b.U_minus == pytest.approx(0.5, abs=1e-9)
        assert b.agree

    def test_choi(self, choi_pair):
        b = prop2_bounds(choi_pair, CFG)
        assert b.U_plus == pytest.approx(2 / 9, abs=1e-4)
        assert b.U_minus == pytest.approx(2 / 9, abs=1e-4)
        assert b.agree


class TestIsCompressed:
    def test_eq8(self):
        rep = is_compressed(ew2_compressed(), CFG)
        assert rep and rep.lambda_min == pytest.approx(0, abs=1e-12) and rep.lambda_max == pytest.approx(0.4)

    def test_identity(self):
        assert not is_compressed(maximally_mixed((2, 2)), CFG)

    def test_choi(self):
        rep = is_compressed(choi3_compressed(), CFG)
        assert rep and rep.lambda_max == pytest.approx(0.2)

    def test_non_psd(self):
        with pytest.raises(PreconditionError):
            is_compressed(builtin("ew2q:plus"), CFG)
