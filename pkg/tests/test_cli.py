import csv
import io
import json
import math

import pytest

from antibunching.cli import CSV_COLUMNS, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_derive_first_and_second_order(capsys):
    code, out, _ = run(capsys, "derive", "--l-max", "1")
    assert code == 0
    assert "d(1) = -2g²t²|α|⁴" in out
    code, out, _ = run(capsys, "derive", "--l-max", "2")
    assert "d(2) = -6g²t²|α|⁶" in out
    assert "<N>^2 = |α|⁴ - 4g²t²|α|⁶" in out


def test_derive_order_zero(capsys):
    _, out, _ = run(capsys, "derive", "--l-max", "3", "--t-order", "0")
    assert [line for line in out.splitlines() if line.startswith("d(")] == ["d(1) = 0", "d(2) = 0", "d(3) = 0"]


def test_derive_json_and_latex(capsys):
    _, out, _ = run(capsys, "derive", "--format", "json")
    data = json.loads(out)
    assert data["d"][0]["value"] == [{"coeff": ["-2", "0"], "powers": {"g": 2, "t": 2, "alpha": 2, "alphabar": 2}}]
    _, out, _ = run(capsys, "derive", "--format", "latex")
    assert r"d(1) &= -2 g^{2} t^{2} |\alpha|^{4}" in out


def test_derive_rejects_unknown_format(capsys):
    code, _, err = run(capsys, "derive", "--format", "yaml")
    assert code == 1 and "unsupported format" in err
    code, _, _ = run(capsys, "derive", "--l-max", "5")
    assert code == 1


def test_sweep_csv_contract(capsys):
    code, out, _ = run(capsys, "sweep", "--gt-grid", "1e-3", "--alpha2-grid", "1,2,4", "--l-max", "1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert tuple(rows[0]) == CSV_COLUMNS
    d = [abs(float(r["d_symbolic"])) for r in rows]
    assert d[0] < d[1] < d[2]
    for r in rows:
        gap = abs(float(r["d_numeric"]) - float(r["d_symbolic"])) / abs(float(r["d_symbolic"]))
        assert float(r["rel_gap"]) == pytest.approx(gap, rel=1e-12)
        assert r["classification"] == "Antibunched"


def test_sweep_no_oracle_and_zero_coupling(capsys):
    code, out, _ = run(capsys, "sweep", "--g", "0", "--gt-grid", "1e-3", "--alpha2-grid", "1", "--no-oracle")
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert float(row["d_symbolic"]) == 0.0
    assert row["d_numeric"] == "" and row["classification"] == "Coherent"


def test_sweep_is_byte_identical(capsys, tmp_path):
    outs = []
    for name in ("one.json", "two.json"):
        path = tmp_path / name
        assert main(["sweep", "--gt-grid", "1e-3,1e-2", "--alpha2-grid", "1", "--format", "json", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


@pytest.mark.parametrize("grid", ["", "1e-2,1e-3", "1e-3,1e-3"])
def test_sweep_rejects_bad_grid(capsys, grid):
    code, _, err = run(capsys, "sweep", "--gt-grid", grid)
    assert code == 1 and "gt_grid" in err


def test_sweep_flags_truncation(capsys):
    code, out, err = run(capsys, "sweep", "--gt-grid", "1e-3", "--alpha2-grid", "4", "--dims", "4,6,6")
    assert code == 2 and "truncation" in err


def test_sweep_config_file(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"gt_grid": [1e-3], "alpha2_grid": [2.0], "l_max": 2, "no_oracle": True}))
    code, out, _ = run(capsys, "sweep", "--config", str(cfg))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["l"] for r in rows] == ["1", "2"]
    assert float(rows[1]["d_symbolic"]) == pytest.approx(-6e-6 * 8, rel=1e-12)
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(capsys, "sweep", "--config", str(cfg))[0] == 1


def test_verify_default_passes_quickly(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0, out
    assert "FAIL" not in out
    seconds = float(out.splitlines()[-1].split(" in ")[1].split()[0])
    assert seconds < 60


def test_verify_fails_on_tiny_pump_dimension(capsys):
    code, out, _ = run(capsys, "verify", "--dims", "4,6,6", "--alpha2-grid", "4")
    assert code == 2
    assert "FAIL  truncation |α|²=4" in out


def test_verify_order_zero_mode(capsys):
    code, out, _ = run(capsys, "verify", "--t-order", "0", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["passed"]
    names = {c["name"]: c for c in data["checks"]}
    assert "order-0 mode" in names["symbolic d(l) at t-order 0"]["detail"]


def _write_csv(path, probs):
    path.write_text("n,p\n" + "".join(f"{n},{p!r}\n" for n, p in probs.items()))


def test_dist_single_photon(capsys, tmp_path):
    f = tmp_path / "sps.csv"
    _write_csv(f, {1: 1.0})
    code, out, _ = run(capsys, "dist", str(f), "--l-max", "1")
    data = json.loads(out)
    assert code == 0
    assert data["orders"][0]["d"] == -1.0
    assert data["sps_verdict"]["passes"] is True


def test_dist_poisson_and_thermal(capsys, tmp_path):
    f = tmp_path / "poisson.csv"
    _write_csv(f, {n: math.exp(-2) * 2**n / math.factorial(n) for n in range(41)})
    data = json.loads(run(capsys, "dist", str(f), "--l-max", "3")[1])
    assert {o["classification"] for o in data["orders"]} == {"Coherent"}
    f = tmp_path / "thermal.json"
    f.write_text(json.dumps([0.5 ** (n + 1) for n in range(61)]))
    data = json.loads(run(capsys, "dist", str(f), "--l-max", "1")[1])
    assert data["orders"][0]["classification"] == "Bunched"
    assert data["sps_verdict"]["passes"] is False


def test_dist_malformed_file(capsys, tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("n,p\n0,0.5\n1,x\n")
    code, _, err = run(capsys, "dist", str(f))
    assert code == 1 and "line 3" in err
    code, _, _ = run(capsys, "dist", str(tmp_path / "missing.csv"))
    assert code == 1
