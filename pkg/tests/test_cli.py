from __future__ import annotations

import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from phstruct.catalog import example_names
from phstruct.cli import HEADER, main


def run(*argv):
    buf = io.StringIO()
    code = main([str(a) for a in argv], out=buf)
    return code, buf.getvalue()


def write(path, doc):
    path.write_text(json.dumps(doc))
    return path


def fields(text):
    out = {}
    for line in text.splitlines():
        key, sep, val = line.strip().partition(": ")
        if sep:
            out.setdefault(key, val)
    return out


@pytest.fixture
def monotone_file(tmp_path):
    return write(tmp_path / "m.json", {
        "layout": {"n": 2},
        "structures": {"M": {"kind": "monotone", "representation": "graph",
                             "matrices": {"M": [[1, 1], [-1, 1]]}}},
    })


@pytest.fixture
def bundled(tmp_path):
    def make(name):
        path = tmp_path / f"{name}.json"
        code, _ = run("example", name, "--out", path)
        assert code == 0
        return path
    return make


class TestValidate:
    @pytest.mark.parametrize("name", example_names())
    def test_bundled_examples_validate(self, bundled, name):
        code, text = run("validate", bundled(name))
        assert code == 0, text
        assert fields(text)["result"] == "valid"

    def test_rejects_non_dirac(self, tmp_path):
        path = write(tmp_path / "bad.json", {
            "layout": {"n": 2},
            "structures": {"D": {"kind": "dirac", "representation": "kernel",
                                 "matrices": {"K": [[1, 0], [0, 1]], "L": [[1, 0], [0, 1]]}}},
        })
        code, text = run("validate", path)
        assert code == 1
        f = fields(text)
        assert f["condition"] == "kl_symmetric" and float(f["residual"]) == 2.0

    def test_witness_reported(self, tmp_path):
        path = write(tmp_path / "neg.json", {
            "layout": {"n": 2},
            "structures": {"M": {"kind": "monotone", "representation": "image",
                                 "matrices": {"Z": [[1, 0], [0, 1]], "Y": [[-1, 0], [0, -1]]}}},
        })
        code, text = run("validate", path)
        assert code == 1 and "witness: 1 x 2" in text

    def test_accepted_cases(self, tmp_path):
        path = write(tmp_path / "ok.json", {
            "layout": {"n": 2},
            "structures": {
                "L": {"kind": "lagrange", "representation": "PS",
                      "matrices": {"P": [[1, 0], [0, 0]], "S": [[1, 0], [0, 1]]}},
                "D": {"kind": "dirac", "representation": "kernel",
                      "matrices": {"K": [[1, 0], [0, 1]], "L": [[0, 1], [-1, 0]]}},
            },
        })
        code, text = run("validate", path)
        assert code == 0
        assert "nonneg_lagrange: true" in text and "dirac: true" in text

    def test_bad_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert run("validate", path)[0] == 2

    def test_missing_file(self, tmp_path):
        code, text = run("validate", tmp_path / "nope.json")
        assert code == 2 and "error" in text

    def test_missing_matrix(self, tmp_path):
        path = write(tmp_path / "short.json", {
            "layout": {"n": 1},
            "structures": {"L": {"kind": "lagrange", "representation": "PS",
                                 "matrices": {"P": [[1]]}}},
        })
        assert run("validate", path)[0] in (1, 2)

    def test_deterministic(self, bundled):
        path = bundled("classical")
        assert run("validate", path) == run("validate", path)


class TestSplitCompose:
    @pytest.mark.parametrize("reduce", [False, True])
    def test_round_trip(self, monotone_file, tmp_path, reduce):
        out = tmp_path / "split.json"
        args = ["split", monotone_file, "M", "--out", out] + (["--reduce"] if reduce else [])
        code, text = run(*args)
        assert code == 0, text
        code, text = run("compose", out, "D", "R", "--compare", "source")
        assert code == 0, text
        assert fields(text)["equal"] == "true"
        assert "dirac: true" in run("validate", out)[1]

    def test_compare_detects_difference(self, tmp_path):
        path = write(tmp_path / "c.json", {
            "layout": {"n": 1, "r": 1},
            "structures": {
                "D": {"kind": "dirac", "representation": "kernel",
                      "matrices": {"K": [[1], [0]], "L": [[0], [-1]],
                                   "K_R": [[1], [0]], "L_R": [[0], [1]]}},
                "R": {"kind": "resistive", "representation": "graph", "matrices": {"M": [[2]]}},
                "W": {"kind": "monotone", "representation": "graph", "matrices": {"M": [[3]]}},
                "V": {"kind": "monotone", "representation": "graph", "matrices": {"M": [[2]]}},
            },
        })
        code, text = run("compose", path, "D", "R", "--compare", "W")
        assert code == 1 and fields(text)["equal"] == "false"
        assert run("compose", path, "D", "R", "--compare", "V")[0] == 0

    def test_unknown_structure(self, monotone_file):
        assert run("compose", monotone_file, "M", "X")[0] == 2


class TestRealize:
    def test_constrained_singular_P_a(self, bundled):
        code, text = run("realize", bundled("constrained"), "--route", "structured")
        assert code == 0
        f = fields(text)
        assert f["P_a_singular"] == "true" and f["rank_P_a"] == "1 of 2"

    @pytest.mark.parametrize("route", ["dlr", "structured", "annihilator"])
    def test_routes_write_json(self, bundled, tmp_path, route):
        out = tmp_path / "real.json"
        code, _ = run("realize", bundled("classical"), "--route", route, "--out", out)
        assert code == 0
        data = json.loads(out.read_text())
        assert data["route"] == route
        E = np.array(data["matrices"]["E"])
        assert E.shape[1] == len(data["state_labels"])


class TestSimulate:
    def test_csv(self, bundled, tmp_path):
        out = tmp_path / "traj.csv"
        code, text = run("simulate", bundled("rc"), "--out", out, "--t-end", "1")
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == f"# {HEADER}"
        assert lines[1].startswith("t,z1,") and lines[1].endswith(",H,residual")
        assert len(lines) == 2 + 101
        assert float(fields(text)["max_balance_residual"]) <= 1e-10

    def test_euler_option(self, bundled):
        code, text = run("simulate", bundled("classical"), "--method", "implicit_euler")
        assert code == 0 and "method implicit_euler" in text

    def test_route_choice_same_energy(self, bundled):
        path = bundled("constrained")
        H = {route: float(fields(run("simulate", path, "--route", route)[1])["H_final"])
             for route in ("dlr", "structured", "annihilator")}
        assert max(H.values()) - min(H.values()) <= 1e-10


class TestTransfer:
    def test_rc_check_pr(self, bundled):
        code, text = run("transfer", bundled("rc"), "--check-pr")
        assert code == 0 and fields(text)["passed"] == "true"
        assert "non-exhaustive" in text

    def test_rc_values(self, bundled):
        _, text = run("transfer", bundled("rc"), "--s", "1,2+1j")
        assert "[0.33333333333333331+0j]" in text

    def test_explicit_route_csv(self, bundled, tmp_path):
        out = tmp_path / "tf.csv"
        code, _ = run("transfer", bundled("classical"), "--route", "explicit",
                      "--re", "1,2", "--im=-1:1:3", "--out", out, "--mag-phase")
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[1] == "re_s,im_s,re_H11,im_H11,abs_H11,arg_H11" and len(lines) == 8

    def test_explicit_route_refused_for_singular_P(self, bundled):
        code, text = run("transfer", bundled("constrained"), "--route", "explicit", "--s", "1")
        assert code == 1 and "Q_invertible" in text

    def test_storage_check(self, bundled):
        path = bundled("constrained")
        assert run("transfer", path, "--check-pr")[0] == 1
        assert run("transfer", path, "--check-pr", "--no-storage-check")[0] == 0


class TestExample:
    def test_list(self):
        code, text = run("example", "--list")
        assert code == 0 and all(name in text for name in example_names())

    def test_stdout_is_bare_json(self):
        code, text = run("example", "rc")
        assert code == 0 and json.loads(text)["layout"] == {"n": 1, "r": 1, "p": 1}

    def test_unknown(self):
        with pytest.raises(SystemExit):
            run("example", "nonexistent")


def test_env_tolerance_override(bundled, monkeypatch):
    path = bundled("rc")
    monkeypatch.setenv("PHS_TOL_RANK", "1e-8")
    assert run("validate", path)[0] == 0
    monkeypatch.setenv("PHS_TOL_RANK", "not-a-number")
    assert run("validate", path)[0] == 2


def test_help_mentions_env_vars():
    proc = subprocess.run([sys.executable, "-m", "phstruct", "--help"], capture_output=True,
                          text=True, env={**os.environ}, check=False)
    assert proc.returncode == 0 and "PHS_TOL_RANK" in proc.stdout


def test_module_entry_point_exit_code(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "phstruct", "validate", str(tmp_path / "x.json")],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 2
