"""Command line interface: schemas, determinism, exit codes."""

import json
import subprocess
import sys

import pytest

from renewal_ldp.cli import main


def run(capsys, *argv):
    rc = main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def table(out: str):
    lines = [ln for ln in out.splitlines() if ln]
    assert lines[0].startswith("# manifest=")
    header = lines[1].split(",")
    rows = [ln.split(",") for ln in lines[2:]]
    return lines[0], header, rows


def test_validate_ok(capsys):
    rc, out, err = run(capsys, "validate", "--config", "count")
    assert rc == 0
    _, header, rows = table(out)
    assert header == ["finding", "status", "detail"]
    assert all(r[1] == "ok" for r in rows)
    assert "validate: ok" in err


def test_validate_accepts_a_file_path(tmp_path, capsys):
    from renewal_ldp import configs
    from renewal_ldp.model import model_to_dict

    path = tmp_path / "custom.json"
    path.write_text(json.dumps(model_to_dict(configs.load("xs23"))))
    rc, out, _ = run(capsys, "validate", "--config", str(path))
    assert rc == 0


def test_unknown_config_exits_2(capsys):
    rc, out, err = run(capsys, "validate", "--config", "missing_model")
    assert rc == 2
    assert err.startswith("error:")
    assert out == ""


def test_partition_schema(capsys):
    rc, out, _ = run(capsys, "partition", "--config", "count", "--T", "5", "--which", "both")
    assert rc == 0
    _, header, rows = table(out)
    assert header == ["t", "ln_Zc", "ln_Z", "ln_Zc_over_t", "ln_Z_over_t"]
    assert len(rows) == 6
    assert rows[0][0] == "0" and rows[0][3] == ""  # no per-t value at t = 0
    assert float(rows[2][1]) == pytest.approx(-0.2876820724517809)


def test_partition_free_only_blanks_constrained_columns(capsys):
    rc, out, _ = run(capsys, "partition", "--config", "count", "--T", "3", "--which", "free")
    assert rc == 0
    _, header, rows = table(out)
    assert header == ["t", "ln_Zc", "ln_Z", "ln_Zc_over_t", "ln_Z_over_t"]
    assert all(r[1] == "" and r[3] == "" for r in rows)
    assert all(r[2] != "" for r in rows)


def test_zfun_point_and_grid(capsys):
    rc, out, _ = run(capsys, "zfun", "--config", "uniform12", "--phi", "1.25")
    assert rc == 0
    _, header, rows = table(out)
    assert header == ["phi_0", "z", "status", "iterations"]
    assert float(rows[0][1]) == pytest.approx(1.25, abs=1e-10)

    rc, out, _ = run(capsys, "zfun", "--config", "count", "--grid=-1:1:5")
    assert rc == 0
    _, _, rows = table(out)
    assert [float(r[0]) for r in rows] == [-1.0, -0.5, 0.0, 0.5, 1.0]


def test_unicode_minus_accepted(capsys):
    rc, out, _ = run(capsys, "zfun", "--config", "uniform12", "--phi", "−2.5")
    assert rc == 0
    _, _, rows = table(out)
    assert float(rows[0][1]) == pytest.approx(-2.5, abs=1e-10)


def test_rate_grid_schema(capsys):
    rc, out, _ = run(
        capsys, "rate", "--config", "count", "--kind", "constrained", "--grid", "0.4:1.0:4"
    )
    assert rc == 0
    _, header, rows = table(out)
    assert header == ["w_0", "value", "status", "arg_phi_0"]
    by_w = {round(float(r[0]), 6): r for r in rows}
    assert by_w[0.4][2] == "infinite" and by_w[0.4][1] == "inf"
    assert by_w[0.4][3] == ""
    assert by_w[0.8][2] == "finite"


def test_rate_two_dim_point(capsys):
    rc, out, _ = run(
        capsys, "rate", "--config", "cauchy23", "--kind", "free-upper", "--w", "1.0,5.0"
    )
    assert rc == 0
    _, header, rows = table(out)
    assert header == ["w_0", "w_1", "value", "status", "arg_phi_0", "arg_phi_1"]
    assert rows[0][3] == "finite"


def test_dist_and_empirical_rate(capsys):
    rc, out, _ = run(
        capsys,
        *["dist", "--config", "count", "--t", "6", "--box", "0.5:0.8", "--scaled"],
    )
    assert rc == 0
    _, header, rows = table(out)
    assert header == ["t", "law", "scaled", "log_prob", "prob", "log_normalizer"]
    assert float(rows[0][4]) == pytest.approx(0.7441860465116279)

    rc, out, _ = run(
        capsys, "empirical-rate", "--config", "count", "--box", "0.5:0.8", "--tlist", "5,10"
    )
    assert rc == 0
    _, header, rows = table(out)
    assert header == ["t", "log_prob", "rate"]
    assert [r[0] for r in rows] == ["5", "10"]


def test_mc_threads_do_not_change_output(capsys):
    args = ["mc", "--config", "count", "--t", "40", "--box", "0.6:0.8", "--n", "50000", "--seed", "5"]
    rc1, out1, _ = run(capsys, *args)
    rc2, out2, _ = run(capsys, *args, "--threads", "4")
    assert rc1 == rc2 == 0
    assert out1 == out2


def test_csv_reruns_are_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        rc = main(
            ["rate", "--config", "count", "--kind", "constrained", "--grid", "0.55:0.95:5", "--csv", str(path)]
        )
        assert rc == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


def test_manifest_reflects_parameters(capsys):
    _, out1, _ = run(capsys, "partition", "--config", "count", "--T", "4")
    _, out2, _ = run(capsys, "partition", "--config", "count", "--T", "5")
    m1 = out1.splitlines()[0]
    m2 = out2.splitlines()[0]
    assert m1.startswith("# manifest=") and m2.startswith("# manifest=")
    assert m1 != m2


def test_sandwich_and_check(capsys):
    rc, out, _ = run(capsys, "sandwich", "--config", "transient", "--t", "500")
    assert rc == 0
    _, header, rows = table(out)
    assert header == ["t", "average", "lower", "upper", "margin", "ok"]
    assert rows[0][5] == "True"

    rc, out, err = run(
        capsys, "check", "supermult", "--config", "count", "--box", "0.5:0.75", "--max", "40"
    )
    assert rc == 0
    assert "0 violations" in err


def test_counterexample_commands(capsys):
    rc, out, err = run(capsys, "counterexample", "open-convex", "--tlist", "20,40")
    assert rc == 0
    _, header, rows = table(out)
    assert header == ["t", "log_prob", "rate"]
    assert "infinite" in err

    rc, out, _ = run(capsys, "counterexample", "closed-convex", "--tlist", "10,20")
    assert rc == 0
    _, header, _ = table(out)
    assert header == ["t", "log_bound", "bound_rate"]


def test_closed_convex_mc_without_seed_exits_2(capsys):
    rc, _, err = run(
        capsys, "counterexample", "closed-convex", "--tlist", "10", "--mc-at", "10"
    )
    assert rc == 2
    assert "seed" in err


def test_mc_requires_seed_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["mc", "--config", "count", "--t", "10", "--box", "0.5:1.0"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_accept_subset(capsys):
    rc, out, _ = run(capsys, "accept", "--criteria", "1,2")
    assert rc == 0
    lines = [ln for ln in out.splitlines() if ln]
    assert len(lines) == 2
    assert all(ln.startswith("[PASS]") for ln in lines)


def test_console_script_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "renewal_ldp.cli", "validate", "--config", "count"],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0
    assert "finding,status,detail" in out.stdout
