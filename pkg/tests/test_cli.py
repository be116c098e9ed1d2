import io
import json
import re
import subprocess
import sys
from contextlib import redirect_stderr, redirect_stdout

import pytest

from isotropy.cli import main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        try:
            code = main(list(argv))
        except SystemExit as e:
            code = e.code
    return code, out.getvalue(), err.getvalue()


def test_rho_p_examples():
    code, out, _ = run("rho-p", "--k", "1", "--n", "4", "--at", "2")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("(") and "p^" in lines[0]
    assert lines[1] == "p=2: 277/279"
    code, out, _ = run("rho-p", "--k", "3", "--n", "5")
    assert (code, out.strip()) == (0, "0")


def test_verify_symmetry_example():
    code, out, _ = run("verify", "symmetry", "--k", "2", "--n-max", "10")
    assert code == 0
    lines = out.splitlines()
    assert all(line.startswith("PASS") for line in lines)
    assert "PASS symmetry i=1 j=2 k=2 n=10" in lines


@pytest.mark.parametrize("suite", ["identities", "hilbert", "solver", "kovaleva", "asymptotic"])
def test_verify_quick_suites(suite):
    code, out, _ = run("verify", suite, "--tier", "quick")
    assert code == 0
    assert out.splitlines()[-1].startswith("PASS")


def test_verify_failure_exit_code(monkeypatch):
    import isotropy.verify as verify
    from isotropy.verify import Check

    monkeypatch.setattr(verify, "hilbert_checks", lambda primes: iter([Check("hilbert", "x", False, "forced")]))
    code, out, _ = run("verify", "hilbert")
    assert code == 1
    assert out.startswith("FAIL hilbert x forced")


def test_exact_commands():
    assert run("pi", "--i", "0", "--l", "1", "--m", "0", "--n", "2", "--at", "2")[1].splitlines() == [
        "(p^2 - 1)/(2*p^2)", "p=2: 3/8"]
    assert run("delta", "--i", "0", "--j", "0", "--k", "1", "--n", "3", "--at", "2")[1].splitlines()[1] == "p=2: 8/9"
    assert run("witt-class", "p=3; n=3; [0,1,0,0,0,1]")[1].strip() == "[1,1,3] radical_dim=0"
    assert run("witt-class", "n=2; [1,0,1]", "--p", "3")[1].strip() == "[0,2,2] radical_dim=0"
    out = run("qp-invariants", "n=4; [1,0,0,0,1,0,0,1,0,1]", "--p", "2")[1]
    assert "witt_index=0" in out and "hasse=+1" in out
    assert run("k-isotropic", "n=4; [1,0,0,0,1,0,0,1,0,1]", "--p", "3", "--k", "2")[1].strip() == "true"
    assert run("k-isotropic", "n=4; [1,0,0,0,1,0,0,1,0,1]", "--p", "2", "--k", "1")[1].strip() == "false"
    out = run("kovaleva", "--p", "3", "--n", "3")[1]
    assert "d=1 c=+1 prob=237/640" in out


def test_euler_product_command():
    code, out, _ = run("euler-product", "--k", "1", "--n", "4")
    assert code == 0 and out.startswith("partial=0.98743625 bracket=[")
    assert "degenerate" in run("euler-product", "--k", "2", "--n", "5")[1]


@pytest.mark.parametrize("argv", [
    ("witt-class", "n=2; [1,2]", "--p", "3"),
    ("witt-class", "n=2; [1,0,1]"),
    ("qp-invariants", "n=1; [1]", "--p", "4"),
    ("k-isotropic", "p=4; n=1; [1]", "--p", "3", "--k", "1"),
    ("delta", "--i", "3", "--j", "0", "--k", "1", "--n", "3"),
    ("delta", "--i", "2", "--j", "2", "--k", "1", "--n", "3"),
    ("pi", "--i", "0", "--l", "0", "--m", "0"),
    ("mc-rho", "--p", "3", "--k", "1", "--n", "3", "--samples", "0"),
    ("kovaleva", "--p", "2", "--n", "3"),
    ("table",),
    ("nonsense",),
])
def test_usage_errors_exit_2(argv):
    code, _, err = run(*argv)
    assert code == 2
    assert err


def test_stochastic_output_reproducible_and_echoes_config():
    argv = ("--format", "csv", "mc-rho", "--p", "3", "--k", "1", "--n", "4", "--samples", "3000", "--seed", "42")
    a, b = run(*argv), run(*argv)
    assert a == b
    lines = a[1].splitlines()
    assert lines[0] == "# config seed=42 samples=3000 digits=8 prime_bound=10000 output_format=csv"
    assert lines[1] == "p,k,n,N,samples,seed,estimate,stderr,exact"


def test_csv_numeric_fields_are_exact_or_have_errors():
    _, out, _ = run("--format", "csv", "rho-infinity", "--k", "1", "--n", "4", "--samples", "2000")
    header = out.splitlines()[1].split(",")
    assert "estimate" in header and "stderr" in header
    _, out, _ = run("--format", "csv", "rho-p", "--k", "1", "--n", "3", "--at", "2", "3")
    for line in out.splitlines()[2:]:
        assert re.fullmatch(r"-?\d+(/\d+)?", line.split(",")[-1])


def test_json_lines():
    _, out, _ = run("--format", "json-lines", "rho-infinity", "--k", "1", "--n", "3", "--samples", "500")
    rows = [json.loads(line) for line in out.splitlines()]
    assert rows[0]["config"]["samples"] == 500
    assert set(rows[1]) >= {"estimate", "stderr", "k", "n"}


def test_table_command_small():
    code, out, _ = run("table", "--remark", "--samples", "2000")
    assert code == 0
    assert out.splitlines()[0].startswith("# config")
    assert "| 1 | 0.98743625 |" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "isotropy", "rho-p", "--k", "1", "--n", "3", "--at", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines()[-1] == "p=2: 8/9"
