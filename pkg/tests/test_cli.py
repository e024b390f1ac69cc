import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from witnesslab.cli import main
from witnesslab.operators import save_operator
from witnesslab.witnesses import builtin

FAST = ["--restarts", "8"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    report = json.loads(out.out) if out.out.strip() else None
    return code, report, out.err


def comparison(report):
    return {c["claim"]: c for c in report["paper_comparison"]}


class TestWindow:
    def test_example(self, capsys):
        code, rep, _ = run(capsys, "window", "--observable", "ew2:ctilde")
        assert code == 0
        assert rep["results"]["L"] == pytest.approx(0.15, abs=1e-4)
        assert rep["results"]["U"] == pytest.approx(0.35, abs=1e-4)
        assert set(rep) == {"command", "inputs", "results", "paper_comparison"}
        assert all(c["agree"] for c in rep["paper_comparison"])
        assert {"C3.L", "C3.U"} == set(comparison(rep))

    def test_maxmix(self, capsys):
        code, rep, _ = run(capsys, "window", "--observable", "maxmix:4", *FAST)
        assert rep["results"]["L"] == rep["results"]["U"] == pytest.approx(0.25)

    def test_choi_max(self, capsys):
        code, rep, _ = run(capsys, "window", "--observable", "choi3", "--mode", "max")
        assert "L" not in rep["results"]
        assert rep["results"]["U"] == pytest.approx(2 / 9, abs=1e-4)

    def test_oracle_and_traces(self, capsys, tmp_path):
        path = tmp_path / "traces.csv"
        code, rep, _ = run(capsys, "window", "--observable", "ew2:ctilde", "--oracle", *FAST, "--csv", str(path))
        assert rep["results"]["oracle"]["min"] == pytest.approx(0.15, abs=1e-3)
        rows = list(csv.DictReader(open(path)))
        assert {r["mode"] for r in rows} == {"min", "max"}
        assert len({r["restart"] for r in rows}) == 8

    def test_unknown(self, capsys):
        code, rep, err = run(capsys, "window", "--observable", "nope")
        assert code == 2 and rep is None and "unknown" in err

    def test_file_input(self, capsys, tmp_path):
        path = tmp_path / "op.json"
        save_operator(builtin("choi3"), path, trace_normalized=True)
        code, rep, _ = run(capsys, "window", "--observable", str(path), "--mode", "max", *FAST)
        assert code == 0 and rep["results"]["U"] == pytest.approx(2 / 9, abs=1e-4)


class TestCompress:
    def test_example(self, capsys):
        code, rep, _ = run(capsys, "compress", "--witness", "ew2q:plus")
        r = rep["results"]
        assert code == 0
        assert r["p_plus"] == pytest.approx(0.6) and r["p_minus"] == pytest.approx(1.4, abs=1e-8)
        assert r["L"] == pytest.approx(0.15, abs=1e-4) and r["U"] == pytest.approx(0.35, abs=1e-4)
        assert r["mirror_identity_residual"] <= 1e-9
        assert r["prop2"]["U_plus"] == pytest.approx(0.5, abs=1e-8)
        assert all(c["agree"] for c in rep["paper_comparison"])

    def test_choi(self, capsys):
        code, rep, _ = run(capsys, "compress", "--witness", "choi3")
        assert rep["results"]["L"] == pytest.approx(1 / 15, abs=1e-4)
        assert rep["results"]["U"] == pytest.approx(7 / 45, abs=1e-4)

    def test_not_a_witness(self, capsys):
        code, rep, err = run(capsys, "compress", "--witness", "maxmix:4", *FAST)
        assert code == 3 and "not an entanglement witness" in err


class TestOtherCommands:
    def test_detect(self, capsys):
        code, rep, _ = run(capsys, "detect", "--observable", "ew2:ctilde", "--state", "iso:alpha=0.5", *FAST)
        assert rep["results"]["verdict"] == "detected_lower"
        assert rep["results"]["margin"] == pytest.approx(0.025, abs=1e-6)

    def test_detect_mismatch(self, capsys):
        code, _, _ = run(capsys, "detect", "--observable", "choi3", "--state", "bell:phi+", *FAST)
        assert code == 2

    def test_gme(self, capsys):
        code, rep, _ = run(capsys, "gme", "--state", "ghz3", *FAST)
        assert rep["results"]["verdict"] == "GME"

    def test_gme_windows(self, capsys):
        code, rep, _ = run(capsys, "gme", "--state", "maxmix:8", "--criterion", "qghz", "--windows", "fully", *FAST)
        win = rep["results"]["windows"]["qghz"]
        assert win["paper_window"] == [0.0, 0.5]
        assert win["hi"] == pytest.approx(0.5, abs=1e-3)
        assert rep["results"]["criterion_value"] == pytest.approx(0.75)
        assert {"C11.lo", "C11.hi"} == set(comparison(rep))

    def test_gme_wrong_profile(self, capsys):
        code, _, _ = run(capsys, "gme", "--state", "bell:phi+", *FAST)
        assert code == 2

    def test_spa(self, capsys):
        code, rep, _ = run(capsys, "spa", "--witness", "ew2q:plus")
        r = rep["results"]
        assert r["p_plus"] == pytest.approx(0.6)
        mixed = np.array(r["positive"]["mixed"]["re"])
        eq8 = np.array([[2, 0, 0, -2], [0, 3, 0, 0], [0, 0, 3, 0], [-2, 0, 0, 2]]) / 10
        assert np.max(np.abs(mixed - eq8)) <= 1e-12
        assert comparison(rep)["C1.p_plus"]["agree"]

    def test_xpa(self, capsys):
        code, rep, _ = run(capsys, "xpa", "--witness", "choi3", "--reference", "maxmix:9", "--mode", "negative")
        assert rep["results"]["weight"] == pytest.approx(1.5, abs=1e-9)

    def test_xpa_rank_deficient(self, capsys):
        code, _, _ = run(capsys, "xpa", "--witness", "ew2q:plus", "--reference", "bell:phi+")
        assert code == 3

    def test_mirror_check(self, capsys):
        code, rep, _ = run(capsys, "mirror-check", "--plus", "choi3", "--minus", "choi3:mirror", *FAST)
        assert rep["results"]["mirror_identity_residual"] <= 1e-9
        assert rep["results"]["p_minus"] == pytest.approx(1.4)

    def test_prop2(self, capsys):
        code, rep, _ = run(capsys, "prop2", "--witness", "ew2q:plus", "--minus", "ew2q:minus", *FAST)
        assert rep["results"]["U_plus"] == pytest.approx(0.5, abs=1e-8)
        assert rep["results"]["agree"]

    def test_decompose_local(self, capsys, tmp_path):
        path = tmp_path / "coeffs.csv"
        code, rep, _ = run(capsys, "decompose-local", "--observable", "ew2q:plus", "--csv", str(path))
        terms = {tuple(t["index"]): t["coefficient"] for t in rep["results"]["terms"]}
        assert terms[(0, 0)] == pytest.approx(0.25)
        assert len(list(csv.reader(open(path)))) == len(terms) + 1

    def test_simplex_scan(self, capsys, tmp_path):
        path = tmp_path / "scan.csv"
        code, rep, _ = run(capsys, "simplex-scan", "--csv", str(path), *FAST)
        r = rep["results"]
        assert code == 0
        assert r["points"] == 41**3
        assert r["bell_vertices"]["phi+"]["class"] == "detected_lower"
        assert r["bell_vertices"]["phi-"]["class"] == "detected_upper"
        with open(path) as fh:
            assert fh.readline().strip() == "c1,c2,c3,class,trace_value"
        assert rep["paper_comparison"][0]["claim"] == "C15.undetected"

    def test_simplex_bad_step(self, capsys):
        code, _, _ = run(capsys, "simplex-scan", "--step", "2")
        assert code == 2

    def test_bad_arguments(self, capsys):
        assert main(["window"]) == 2
        assert main(["no-such-command"]) == 2


class TestReports:
    @pytest.mark.parametrize(
        "argv",
        [
            ["compress", "--witness", "choi3", "--seed", "7", *FAST],
            ["window", "--observable", "qghzlin", "--seed", "2", *FAST],
            ["simplex-scan", "--step", "0.25", *FAST],
            ["gme", "--state", "dicke3", *FAST],
        ],
    )
    def test_deterministic(self, capsys, argv):
        first = (main(argv), capsys.readouterr().out)
        second = (main(argv), capsys.readouterr().out)
        assert first == second

    def test_timestamps_opt_in(self, capsys):
        _, rep, _ = run(capsys, "window", "--observable", "maxmix:4", *FAST, "--timestamps")
        assert "elapsed_seconds" in rep

    def test_json_file(self, capsys, tmp_path):
        path = tmp_path / "report.json"
        _, rep, _ = run(capsys, "spa", "--witness", "choi3", "--json", str(path))
        assert json.loads(path.read_text()) == rep

    def test_inputs_echoed(self, capsys):
        _, rep, _ = run(capsys, "window", "--observable", "maxmix:4", "--seed", "11", *FAST)
        assert rep["inputs"]["seed"] == 11 and rep["inputs"]["restarts"] == 8
        assert rep["command"] == "window"


class TestVerify:
    def test_passing_criterion(self, capsys):
        code, rep, err = run(capsys, "verify", "--criterion", "1", "--criterion", "2")
        assert code == 0
        assert "[PASS] criterion 1" in err
        assert rep["results"]["all_hard_claims_agree"]

    def test_report_only_does_not_fail(self, capsys):
        code, rep, _ = run(capsys, "verify", "--criterion", "14")
        assert code == 0
        assert not all(c["agree"] for c in rep["paper_comparison"])

    def test_unknown_criterion(self, capsys):
        code, _, _ = run(capsys, "verify", "--criterion", "99")
        assert code == 2


def test_console_script():
    out = subprocess.run(
        [sys.executable, "-m", "witnesslab.cli", "window", "--observable", "maxmix:4", "--restarts", "2"],
        capture_output=True, text=True, check=True,
    )
    assert json.loads(out.stdout)["results"]["L"] == pytest.approx(0.25)
