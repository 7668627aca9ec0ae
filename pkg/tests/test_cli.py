import json
import subprocess
import sys

import numpy as np
import pytest

from hadcert import bjorck7, fourier, petrescu
from hadcert.cli import CliError, format_matrix, main, parse_matrix


def run_cli(args, stdin=None):
    proc = subprocess.run(
        [sys.executable, "-m", "hadcert", *args],
        capture_output=True,
        text=True,
        input=stdin,
    )
    return proc.returncode, proc.stdout, proc.stderr


class TestMatrixFormat:
    def test_cart_round_trip_exact(self, rng):
        u = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        text = format_matrix(u, "cart")
        v = parse_matrix(text)
        assert np.array_equal(u, v)

    def test_cart_write_read_write_byte_identical(self):
        text = format_matrix(bjorck7(), "cart")
        again = format_matrix(parse_matrix(text), "cart")
        assert text == again

    def test_phase_round_trip(self):
        u = petrescu(np.exp(0.3j))
        v = parse_matrix(format_matrix(u, "phase"))
        assert np.max(np.abs(u - v)) < 1e-15

    def test_phase_rejects_non_flat(self):
        with pytest.raises(CliError):
            format_matrix(np.eye(3), "phase")

    @pytest.mark.parametrize("text", [
        "",
        "CART x\n1,0",
        "CART 2\n1,0 2,0\n",            # missing row
        "CART 1\n1,0 2,0\n",            # extra column
        "PHASE 2\n0 zz\n0 0\n",
        "NOPE 2\n1 2\n3 4\n",
    ])
    def test_parse_errors(self, text):
        with pytest.raises(CliError):
            parse_matrix(text)


class TestGen:
    def test_fourier_entry(self):
        code, out, _ = run_cli(["gen", "fourier", "--n", "7"])
        assert code == 0
        assert out.startswith("CART 7\n")
        first = out.splitlines()[1].split()[0]
        re_s, im_s = first.split(",")
        assert abs(float(re_s) - 1 / np.sqrt(7)) < 1e-15
        assert float(im_s) == 0.0

    def test_petrescu_at_zero_angle(self, tmp_path):
        code, out, _ = run_cli(["gen", "petrescu", "--lambda-angle", "0"])
        assert code == 0
        u = parse_matrix(out)
        assert np.max(np.abs(u - petrescu(1.0))) < 1e-15

    def test_bad_order_exit_2(self):
        code, _, err = run_cli(["gen", "fourier", "--n", "0"])
        assert code == 2
        assert "order must be >= 1" in err

    def test_circulant_from_row_file(self, tmp_path):
        row = tmp_path / "row.txt"
        row.write_text("1,0 0,0 0,0\n")
        code, out, _ = run_cli(["gen", "circulant", "--row", str(row)])
        assert code == 0
        assert np.array_equal(parse_matrix(out), np.eye(3, dtype=complex))

    def test_qr_circulant_solve(self):
        code, out, _ = run_cli(["gen", "qr-circulant", "--n", "7"])
        assert code == 0
        u = parse_matrix(out)
        assert np.max(np.abs(np.abs(u) - 1 / np.sqrt(7))) < 1e-12

    def test_phase_format(self):
        code, out, _ = run_cli(["gen", "fourier", "--n", "5", "--format", "phase"])
        assert code == 0
        assert out.startswith("PHASE 5\n")
        assert np.max(np.abs(parse_matrix(out) - fourier(5))) < 1e-15


class TestVerify:
    def test_bjorck_accepted(self, tmp_path):
        f = tmp_path / "b.mat"
        f.write_text(format_matrix(bjorck7()))
        code, out, _ = run_cli(["verify", str(f)])
        assert code == 0
        doc = json.loads(out)
        assert doc["is_biunitary"] is True
        assert list(doc.keys()) == [
            "is_biunitary", "max_modulus_deviation", "max_unitarity_residual",
        ]

    def test_identity_rejected(self, tmp_path):
        f = tmp_path / "i.mat"
        f.write_text(format_matrix(np.eye(4, dtype=complex)))
        code, out, _ = run_cli(["verify", str(f)])
        assert code == 1
        assert json.loads(out)["is_biunitary"] is False

    def test_malformed_exit_2(self, tmp_path):
        f = tmp_path / "bad.mat"
        f.write_text("CART 3\n1,0 2,0\n")
        code, _, err = run_cli(["verify", str(f)])
        assert code == 2
        assert "error:" in err

    def test_stdin(self):
        code, out, _ = run_cli(["verify", "-"], stdin=format_matrix(fourier(3)))
        assert code == 0


class TestCertify:
    def test_fourier7_isolated_exit_0(self, tmp_path):
        f = tmp_path / "f7.mat"
        f.write_text(format_matrix(fourier(7)))
        code, out, _ = run_cli(["certify", str(f)])
        assert code == 0
        doc = json.loads(out)
        assert doc["verdict"] == "Isolated"
        assert doc["rank"] == 36
        assert list(doc.keys()) == [
            "n", "rank", "expected", "verdict", "gap", "singular_values", "policy",
        ]

    def test_fourier6_span_fails_exit_1(self, tmp_path):
        f = tmp_path / "f6.mat"
        f.write_text(format_matrix(fourier(6)))
        code, out, _ = run_cli(["certify", str(f)])
        assert code == 1
        assert json.loads(out)["verdict"] == "SpanFails"

    def test_absurd_rank_cut_exit_1(self, tmp_path):
        f = tmp_path / "f7.mat"
        f.write_text(format_matrix(fourier(7)))
        code, out, _ = run_cli(["certify", str(f), "--rank-cut", "0.5"])
        assert code == 1
        assert json.loads(out)["verdict"] != "Isolated"

    def test_non_biunitary_exit_2(self, tmp_path):
        f = tmp_path / "i.mat"
        f.write_text(format_matrix(np.eye(4, dtype=complex)))
        code, _, err = run_cli(["certify", str(f)])
        assert code == 2


class TestPairs:
    def test_block_on_petrescu(self, tmp_path):
        f = tmp_path / "p.mat"
        f.write_text(format_matrix(petrescu(1.0)))
        code, out, _ = run_cli(["pairs", str(f), "--mode", "block"])
        assert code == 0
        docs = json.loads(out)
        keys = [(d["p1"], d["p2"], d["d1"], d["d2"]) for d in docs]
        assert ([0, 1], [2, 3], [0, 1], [2, 3]) in keys
        assert all(d["theorem"] == "constr2" for d in docs)
        assert all(d["base"] == str(f) for d in docs)

    def test_commuting_on_fourier5_empty_exit_1(self, tmp_path):
        f = tmp_path / "f5.mat"
        f.write_text(format_matrix(fourier(5)))
        code, out, _ = run_cli(["pairs", str(f), "--mode", "commuting"])
        assert code == 1
        assert json.loads(out) == []

    def test_cap_exit_2(self, tmp_path):
        f = tmp_path / "f16.mat"
        f.write_text(format_matrix(fourier(16)))
        code, _, err = run_cli(["pairs", str(f), "--mode", "commuting"])
        assert code == 2
        assert "cap" in err


class TestFamily:
    def test_param_zero_round_trips_bytes(self, tmp_path):
        base = tmp_path / "f4.mat"
        base.write_text(format_matrix(fourier(4)))
        code, specs_out, _ = run_cli(["pairs", str(base), "--mode", "commuting"])
        assert code == 0
        spec = tmp_path / "spec.json"
        spec.write_text(specs_out)
        code, out, _ = run_cli(["family", str(base), "--spec", str(spec), "--param", "0"])
        assert code == 0
        assert out == base.read_text()

    def test_petrescu_family_matches_gen(self, tmp_path):
        base = tmp_path / "p.mat"
        base.write_text(format_matrix(petrescu(1.0)))
        _, specs_out, _ = run_cli(["pairs", str(base), "--mode", "block"])
        docs = json.loads(specs_out)
        idx = next(
            i for i, d in enumerate(docs)
            if (d["p1"], d["p2"], d["d1"], d["d2"]) == ([0, 1], [2, 3], [0, 1], [2, 3])
        )
        spec = tmp_path / "spec.json"
        spec.write_text(specs_out)
        ang = np.pi / 3
        code, fam_out, _ = run_cli(
            ["family", str(base), "--spec", str(spec), "--param", str(ang), "--index", str(idx)]
        )
        assert code == 0
        code, gen_out, _ = run_cli(["gen", "petrescu", "--lambda-angle", str(ang)])
        a = parse_matrix(fam_out)
        b = parse_matrix(gen_out)
        assert np.max(np.abs(a - b)) < 1e-12

    def test_family_member_verifies(self, tmp_path):
        base = tmp_path / "p.mat"
        base.write_text(format_matrix(petrescu(1.0)))
        _, specs_out, _ = run_cli(["pairs", str(base), "--mode", "block"])
        spec = tmp_path / "spec.json"
        spec.write_text(specs_out)
        _, fam_out, _ = run_cli(["family", str(base), "--spec", str(spec), "--param", "2.2"])
        code, _, _ = run_cli(["verify", "-"], stdin=fam_out)
        assert code == 0

    def test_uncertified_spec_exit_2(self, tmp_path):
        base = tmp_path / "b.mat"
        base.write_text(format_matrix(bjorck7()))
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({
            "theorem": "constr2", "base": "x", "p1": [0, 1], "p2": [2, 3],
            "d1": [0, 1], "d2": [2, 3], "residual": 0.0,
        }))
        code, _, err = run_cli(["family", str(base), "--spec", str(spec), "--param", "1.0"])
        assert code == 2
        assert "uncertified" in err


class TestSearch:
    def test_invalid_masks_exit_2(self):
        code, _, err = run_cli(["search", "--n", "4", "--masks", "0;1;2"])
        assert code == 2

    def test_max_iters_one_not_converged(self):
        code, out, _ = run_cli([
            "search", "--n", "5", "--masks", "0;1;2;3", "--seed", "0",
            "--max-iters", "1",
        ])
        assert code == 1
        assert json.loads(out)["converged"] is False

    def test_converges_near_solution(self, tmp_path):
        code, out, _ = run_cli([
            "search", "--n", "5", "--masks", ";;;", "--seed", "1", "--starts", "2",
        ])
        assert code == 0
        doc = json.loads(out)
        assert doc["converged"] is True
        assert len(doc["phases"]) == 25


class TestRepro:
    def test_rank_and_det(self):
        code, out, err = run_cli(["repro"])
        assert code == 0
        doc = json.loads(out)
        assert doc["rank"] == 36
        assert doc["minor_order"] == 36
        assert doc["minor_full_rank"] is True
        assert "rank 36" in err


class TestDeterminism:
    @pytest.mark.parametrize("args", [
        ["repro"],
        ["gen", "petrescu", "--lambda-angle", "0.75"],
        ["search", "--n", "4", "--masks", ";;;", "--seed", "7", "--starts", "2",
         "--max-iters", "50"],
    ])
    def test_byte_identical_runs(self, args):
        code1, out1, _ = run_cli(args)
        code2, out2, _ = run_cli(args)
        assert code1 == code2
        assert out1 == out2

    def test_certify_byte_identical(self, tmp_path):
        f = tmp_path / "f5.mat"
        f.write_text(format_matrix(fourier(5)))
        _, out1, _ = run_cli(["certify", str(f)])
        _, out2, _ = run_cli(["certify", str(f)])
        assert out1 == out2
