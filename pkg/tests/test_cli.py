import json
import subprocess
import sys

import pytest

from nestedcss import gf2
from nestedcss.cli import EXIT_CERT, EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, main, parse


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_bogus_subcommand(capsys):
    code, _, err = run(["frobnicate"], capsys)
    assert code == EXIT_USAGE
    assert json.loads(err)["error"] == "usage"


def test_strict_requires_seed(capsys):
    code, _, err = run(["build", "--strict", "--jz", "3", "--kz", "6", "--jd", "2", "--kd", "4",
                        "--k", "8", "--n", "16"], capsys)
    assert code == EXIT_USAGE
    assert "--seed" in json.loads(err)["message"]


def test_seed_defaults_to_zero():
    _, rc = parse(["sample", "--j", "3", "--k-row", "6", "--n", "12"])
    assert rc.seed == 0


def test_threads_validated(capsys):
    code, _, _ = run(["tables", "D", "--threads", "0"], capsys)
    assert code == EXIT_USAGE


def test_domain_error(capsys):
    # 3 * 10 is not divisible by 4
    code, _, err = run(["sample", "--seed", "1", "--j", "3", "--k-row", "4", "--n", "10"], capsys)
    assert code == EXIT_DOMAIN
    assert json.loads(err)["error"] == "domain"


def test_build_example_profile(capsys):
    code, out, _ = run(["build", "--seed", "3", "--no-timestamp", "--jz", "3", "--kz", "8", "--jd", "2",
                        "--kd", "8", "--k", "8", "--n", "40"], capsys)
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["css_ok"] is True
    assert "timestamp" not in rep


def test_build_byte_identical(capsys):
    argv = ["build", "--seed", "11", "--no-timestamp", "--jz", "3", "--kz", "8", "--jd", "2", "--kd", "8",
            "--k", "8", "--n", "40"]
    _, a, _ = run(argv, capsys)
    _, b, _ = run(argv, capsys)
    assert a == b


def test_sample_f2m_roundtrip(tmp_path, capsys):
    path = tmp_path / "m.f2m"
    code, _, _ = run(["sample", "--seed", "5", "--j", "3", "--k-row", "6", "--n", "12", "-o", str(path)], capsys)
    assert code == EXIT_OK
    M = gf2.read_f2m(path)
    assert M.shape == (6, 12)
    assert gf2.dumps_f2m(M) == path.read_text()
    assert set(M.col_weights().tolist()) <= {1, 3}  # mod-2 multigraph may cancel double edges


def test_build_writes_matrices(tmp_path, capsys):
    code, out, _ = run(["build", "--seed", "2", "--jz", "3", "--kz", "8", "--jd", "2", "--kd", "8", "--k", "8",
                        "--n", "40", "--matrices", str(tmp_path)], capsys)
    assert code == EXIT_OK
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["A_Delta.f2m", "A_Z.f2m", "B.f2m", "H_X.f2m", "H_Z.f2m"]
    H_Z, H_X = gf2.read_f2m(tmp_path / "H_Z.f2m"), gf2.read_f2m(tmp_path / "H_X.f2m")
    assert gf2.mul(H_X, H_Z.T).is_zero()


def test_enum_outer_exact(capsys):
    code, out, _ = run(["enum", "outer", "--n", "4", "--jz", "2", "--k", "4", "--s", "1"], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["value"] == "12/7"


def test_oracle_within_three_sigma(capsys):
    code, out, _ = run(["oracle", "--seed", "7", "--triple", "2,2,4", "--n", "4", "--t1", "1", "--td", "0",
                        "--w", "1", "--samples", "20000"], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["within_3sigma"]


def test_certify_triple_tables(capsys):
    code, out, _ = run(["certify", "--triple", "4,6,10", "--tables", "--no-timestamp"], capsys)
    assert code == EXIT_OK
    d = json.loads(out)
    assert d["ok"] and [c["side"] for c in d["certificates"]] == ["HA", "MN"]


def test_certify_boundary_failure(capsys):
    code, out, err = run(["certify", "--boundary", "3"], capsys)
    assert code == EXIT_CERT
    e = json.loads(err)
    assert e["error"] == "certification"
    assert {f["status"] for f in e["failed"]} == {"Refused", "Failed"}


def test_certify_psi(capsys):
    code, out, _ = run(["certify", "--psi", "5", "--no-timestamp"], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["certificates"][0]["status"] == "Certified"


def test_tables_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["tables", "D", "--no-timestamp", "-o", str(a)]) == EXIT_OK
    assert main(["tables", "D", "--no-timestamp", "-o", str(b), "--threads", "2"]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text('seed = 9\ntimestamp = false\n')
    ns, rc = parse(["--config", str(cfg), "sample", "--j", "3", "--k-row", "6", "--n", "12"])
    assert rc.seed == 9 and rc.timestamp is False
    ns, rc = parse(["--config", str(cfg), "sample", "--seed", "4", "--j", "3", "--k-row", "6", "--n", "12"])
    assert rc.seed == 4


def test_missing_config_is_usage(capsys):
    code, _, _ = run(["--config", "/nonexistent.toml", "tables", "D"], capsys)
    assert code == EXIT_USAGE


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "nestedcss.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.strip() == "0.1.0"


@pytest.mark.parametrize("argv", [["certify"], ["tables", "Q"], ["enum", "outer"]])
def test_usage_errors(argv, capsys):
    code, _, _ = run(argv, capsys)
    assert code == EXIT_USAGE
