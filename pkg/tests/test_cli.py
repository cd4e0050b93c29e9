import json
import subprocess
import sys

import pytest

from conftest import oracle, rel
from ellhyp.cli import main
from ellhyp.gamma import BasePair
from ellhyp.integrals import elliptic_beta_closed


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def lines(text):
    return [json.loads(x) for x in text.splitlines() if x.strip()]


class TestSuite:
    def test_theta(self, capsys):
        code, out, _ = run(capsys, "suite", "--filter", "theta.*", "--no-timing")
        reps = lines(out)
        assert code == 0 and reps and all(r["pass"] for r in reps)

    def test_failure_exit(self, capsys):
        code, out, _ = run(capsys, "suite", "--filter", "theta.triple_product", "--tol", "0")
        assert code == 1 and lines(out)[0]["pass"] is False

    def test_no_match(self, capsys):
        code, _, err = run(capsys, "suite", "--filter", "zzz.*")
        assert code == 2 and "matches no check" in err

    def test_bad_flag(self, capsys):
        assert run(capsys, "suite", "--frobnicate")[0] == 2
        assert run(capsys)[0] == 2

    def test_list(self, capsys):
        code, out, _ = run(capsys, "suite", "--list", "--filter", "heun.psi*")
        assert code == 0 and out.split() == ["heun.psi2", "heun.psi1"]

    def test_json_file(self, capsys, tmp_path):
        path = tmp_path / "out.jsonl"
        code, out, _ = run(capsys, "suite", "--filter", "gamma.shift", "--no-timing", "--json", str(path))
        assert code == 0 and path.read_text() == out

    def test_deterministic(self, capsys):
        a = run(capsys, "suite", "--filter", "sklyanin.*", "--seed", "3", "--no-timing")[1]
        b = run(capsys, "suite", "--filter", "sklyanin.*", "--seed", "3", "--no-timing")[1]
        assert a == b


class TestEval:
    def test_theta(self, capsys):
        code, out, _ = run(capsys, "eval", "theta", "0", "0.5j", "--k", "3")
        assert code == 0 and rel(complex(*lines(out)[0]["value"]), oracle("theta3_0_tau0.5i")) < 1e-13

    def test_beta(self, capsys):
        args = ["0.5", "0.6j", "-0.55", "0.45-0.2j", "0.7"]
        code, out, _ = run(capsys, "eval", "beta", *args)
        r = lines(out)[0]
        t = [complex(*x) for x in r["t"]]
        want = elliptic_beta_closed(t, BasePair(0.11, 0.23))
        assert code == 0 and abs(complex(*r["value"]) - want) < 1e-9 * abs(want)

    def test_arity(self, capsys):
        code, _, err = run(capsys, "eval", "gamma", "0.5", "0.6")
        assert code == 2 and "takes 1" in err

    def test_bad_number(self, capsys):
        assert run(capsys, "eval", "gamma", "abc")[0] == 2

    def test_inadmissible(self, capsys):
        code, _, err = run(capsys, "eval", "beta", "1.5", "0.5", "0.5", "0.5", "0.5")
        assert code == 1 and "Error" in err


class TestOthers:
    def test_bethe(self, capsys):
        code, out, _ = run(capsys, "bethe", "--N", "1")
        r = lines(out)[0]
        assert code == 0 and len(r["roots"]) == 1 and max(r["system_residual"]) < 1e-10
        E = [complex(*x) for x in r["energy"]]
        assert max(abs(e - E[0]) for e in E) < 1e-8 * abs(E[0])

    def test_heun_limit(self, capsys):
        code, out, _ = run(capsys, "heun-limit")
        rows = lines(out)
        assert code == 0 and [r["testfn"] for r in rows] == ["theta_pair", "exp", "cos_plus_square"]
        assert all(2.7 <= r["order"] <= 3.3 for r in rows)

    def test_console_script(self):
        p = subprocess.run([sys.executable, "-m", "ellhyp.cli", "eval", "gamma", "0.5"], capture_output=True,
                           text=True)
        assert p.returncode == 0 and json.loads(p.stdout)["kind"] == "gamma"
