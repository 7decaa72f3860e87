"""Config handling, report format, determinism and the command surface."""

import csv
import json
import math

import numpy as np
import pytest

import bicomm
from bicomm.cli import ExperimentConfig, main, run
from bicomm.grid import GridSignal2D, save_signal


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return reader.fieldnames, list(reader)


def write_config(tmp_path, **kw):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(kw))
    return str(path)


def test_config_defaults():
    cfg = ExperimentConfig("identity-check")
    assert cfg.N == 256
    assert cfg.n == 4
    assert cfg.seed == 0
    assert abs(cfg.gamma - 0.5 ** (1.0 / 3.0)) < 1e-15
    cfg = ExperimentConfig("identity-check", N=64, delta=0.125)
    assert cfg.n == 2
    assert abs(cfg.gamma - 0.5) < 1e-15


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig("fft-everything")
    with pytest.raises(ValueError):
        ExperimentConfig("identity-check", N=100)
    with pytest.raises(ValueError):
        ExperimentConfig("identity-check", N=8)
    with pytest.raises(ValueError):
        ExperimentConfig("identity-check", N=64, n=3)
    with pytest.raises(ValueError):
        ExperimentConfig("identity-check", family="sobolev")
    with pytest.raises(ValueError):
        ExperimentConfig("identity-check", delta=1.0)
    with pytest.raises(ValueError):
        ExperimentConfig("identity-check", instances=0)
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"command": "identity-check", "colour": 3})
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"command": "bmo-scan"}, command="identity-check")


def test_config_hash_sensitivity():
    base = {"command": "norm-compare", "N": 64, "seed": 1}
    h = ExperimentConfig.from_dict(base).config_hash()
    assert h == ExperimentConfig.from_dict(dict(base)).config_hash()
    assert len(h) == 12
    other = ExperimentConfig.from_dict({**base, "seed": 2}).config_hash()
    assert other != h
    # the output directory is bookkeeping, not part of the experiment
    moved = ExperimentConfig.from_dict({**base, "out": "elsewhere"}).config_hash()
    assert moved == h


def test_identity_check_report(tmp_path):
    cfg = ExperimentConfig("identity-check", N=64, instances=5, out=str(tmp_path / "r"))
    csv_path, json_path = run(cfg)
    fields, rows = read_csv(csv_path)
    assert fields == [
        "instance",
        "e_basic_residual",
        "e_commutator_residual",
        "two_parameter_residual",
        "config_hash",
        "version",
    ]
    assert len(rows) == 5
    for row in rows:
        assert float(row["e_basic_residual"]) < 1e-10
        assert float(row["e_commutator_residual"]) < 1e-9
        assert float(row["two_parameter_residual"]) < 1e-9
        assert row["config_hash"] == cfg.config_hash()
        assert row["version"] == bicomm.__version__
    summary = json.loads(open(json_path).read())
    assert summary["command"] == "identity-check"
    assert summary["config_hash"] == cfg.config_hash()
    stats = summary["metrics"]["e_basic_residual"]
    assert stats["min"] <= stats["mean"] <= stats["max"]


def test_rerun_byte_identical(tmp_path):
    cfg1 = ExperimentConfig("norm-compare", N=32, instances=4, out=str(tmp_path / "a"))
    cfg2 = ExperimentConfig("norm-compare", N=32, instances=4, out=str(tmp_path / "b"))
    p1, _ = run(cfg1, jobs=1)
    p2, _ = run(cfg2, jobs=3)
    assert open(p1, "rb").read() == open(p2, "rb").read()


def test_wavelet_audit_small_grid(tmp_path):
    cfg = ExperimentConfig("wavelet-audit", N=256, instances=3, out=str(tmp_path / "r"))
    csv_path, _ = run(cfg)
    fields, rows = read_csv(csv_path)
    assert fields[:3] == ["instance", "item", "value"]
    items = {row["item"]: float(row["value"]) for row in rows}
    assert items["gram_deviation"] < 1e-6
    assert items["partition_residual"] < 1e-12
    assert any(k.startswith("decay_constant_j") for k in items)
    assert all(v < 1e-8 for k, v in items.items() if k.startswith("wij_zero"))
    # the kernel-orthogonality quadruples need scales past this grid
    assert not any(k.startswith("orthoI") for k in items)


def test_bmo_scan_exact_at_small_scale(tmp_path):
    cfg = ExperimentConfig("bmo-scan", N=64, instances=6, out=str(tmp_path / "r"))
    csv_path, _ = run(cfg)
    _, rows = read_csv(csv_path)
    for row in rows:
        assert row["product_exact"] == "1"
        assert float(row["greedy_over_product"]) <= 1.0 + 1e-9
        assert float(row["product_value"]) >= float(row["rect_value"]) - 1e-9


def test_norm_compare_and_plot_data(tmp_path):
    out = tmp_path / "r"
    cfg = ExperimentConfig("norm-compare", N=32, instances=4, out=str(out))
    csv_path, _ = run(cfg)
    fields, rows = read_csv(csv_path)
    for row in rows:
        assert float(row["operator_norm"]) > 0.0
        ratio = float(row["norm_over_bmo"]) * float(row["bmo_over_norm"])
        assert abs(ratio - 1.0) < 1e-12

    scatter = ExperimentConfig(
        "plot-data",
        source=csv_path,
        kind="scatter",
        metrics=("operator_norm", "product_bmo_lower"),
        out=str(out),
    )
    path, _ = run(scatter)
    lines = open(path).read().splitlines()
    assert lines[0] == "# operator_norm product_bmo_lower"
    assert len(lines) == 1 + len(rows)

    hist = ExperimentConfig(
        "plot-data", source=csv_path, kind="histogram", metrics=("rect_bmo",), bins=5, out=str(out)
    )
    path, _ = run(hist)
    lines = open(path).read().splitlines()
    counts = [int(line.split()[1]) for line in lines[1:]]
    assert sum(counts) == len(rows)

    bad = ExperimentConfig(
        "plot-data", source=csv_path, kind="scatter", metrics=("no_such", "rect_bmo"), out=str(out)
    )
    with pytest.raises(ValueError, match="no_such"):
        run(bad)
    with pytest.raises(ValueError):
        run(ExperimentConfig("plot-data", kind="scatter", metrics=("a", "b"), out=str(out)))


def test_plot_data_empty_source(tmp_path):
    src = tmp_path / "empty.csv"
    src.write_text("instance,value,config_hash,version\n")
    cfg = ExperimentConfig(
        "plot-data", source=str(src), kind="histogram", metrics=("value",), out=str(tmp_path)
    )
    path, _ = run(cfg)
    lines = open(path).read().splitlines()
    assert lines == ["# value_bin_center count"]


def test_journe_scan_random_family(tmp_path):
    cfg = ExperimentConfig("journe-scan", N=64, instances=5, out=str(tmp_path / "r"))
    csv_path, _ = run(cfg)
    _, rows = read_csv(csv_path)
    for row in rows:
        assert float(row["journe_ratio"]) <= float("inf")
        assert float(row["max_mu"]) >= 1.0 or float(row["maximal_count"]) == 0.0


def test_journe_scan_row_family(tmp_path):
    cfg = ExperimentConfig(
        "journe-scan", N=64, family="row-of-squares-dual", K=4, instances=2, out=str(tmp_path / "r")
    )
    csv_path, _ = run(cfg)
    _, rows = read_csv(csv_path)
    assert [row["K"] for row in rows] == ["4", "8"]
    assert abs(float(rows[0]["nu_middle"]) - 23.0 / 3.0) < 1e-12
    assert abs(float(rows[1]["nu_middle"]) - 43.0 / 3.0) < 1e-12
    assert float(rows[0]["mu_middle"]) == 1.0
    assert float(rows[1]["nu_over_mu"]) >= 2.0


def test_oracle_audit(tmp_path):
    with pytest.raises(ValueError):
        run(ExperimentConfig("oracle-audit", N=64, instances=1, out=str(tmp_path)))
    cfg = ExperimentConfig("oracle-audit", N=16, instances=3, out=str(tmp_path / "r"))
    csv_path, _ = run(cfg)
    _, rows = read_csv(csv_path)
    for row in rows:
        assert float(row["power_svd_diff"]) < 1e-6
        assert abs(float(row["hankel_ratio"]) - 1.0) < 1e-6


def test_decomposition_chain(tmp_path):
    cfg = ExperimentConfig("decomposition", N=32, n=1, instances=3, out=str(tmp_path / "r"))
    csv_path, _ = run(cfg)
    fields, rows = read_csv(csv_path)
    assert fields[:10] == [
        "instance",
        "measure_u",
        "measure_v",
        "rect_bmo",
        "bracket_uu",
        "bracket_vu",
        "bracket_wu",
        "bracket_uv_u",
        "bracket_b_u",
        "operator_norm",
    ]
    for row in rows:
        mu = float(row["measure_u"])
        assert 0.5 <= mu <= 1.0
        assert float(row["measure_v"]) >= mu
        # {b, bU} splits into the three window pieces
        assert float(row["bracket_b_u"]) <= (
            float(row["bracket_uu"]) + float(row["bracket_vu"]) + float(row["bracket_wu"]) + 1e-9
        )
        assert float(row["operator_norm"]) > 0.0


def test_file_family_roundtrip(tmp_path):
    rng = np.random.default_rng(90)
    N = 32
    sig = GridSignal2D(rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N)))
    sig_path = tmp_path / "symbol.sig"
    save_signal(str(sig_path), sig)
    cfg = ExperimentConfig(
        "norm-compare", N=N, family="file", file=str(sig_path), instances=2, out=str(tmp_path / "r")
    )
    csv_path, _ = run(cfg)
    _, rows = read_csv(csv_path)
    # the file symbol is fixed; instances differ only in the power-iteration
    # start vector, so the norms agree to the iteration tolerance
    a = float(rows[0]["operator_norm"])
    b = float(rows[1]["operator_norm"])
    assert abs(a - b) < 1e-6 * max(1.0, a)

    wrong = ExperimentConfig(
        "norm-compare", N=64, family="file", file=str(sig_path), instances=1, out=str(tmp_path / "r")
    )
    with pytest.raises(ValueError):
        run(wrong)
    with pytest.raises(ValueError):
        run(ExperimentConfig("norm-compare", N=N, family="file", instances=1, out=str(tmp_path)))


def test_main_exit_codes(tmp_path, capsys):
    good = write_config(tmp_path, N=32, instances=2)
    assert main(["identity-check", "--config", good, "--out", str(tmp_path / "r")]) == 0
    out = capsys.readouterr().out
    assert "wrote" in out

    assert main(["identity-check", "--config", str(tmp_path / "missing.json")]) == 2
    bad = write_config(tmp_path, N=100)
    assert main(["identity-check", "--config", bad]) == 2
    mismatched = write_config(tmp_path, command="bmo-scan")
    assert main(["identity-check", "--config", mismatched]) == 2


def test_main_seed_override(tmp_path):
    cfg_path = write_config(tmp_path, N=32, instances=2)
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    assert main(["norm-compare", "--config", cfg_path, "--out", str(out1), "--seed", "7"]) == 0
    assert main(["norm-compare", "--config", cfg_path, "--out", str(out2), "--seed", "8"]) == 0
    rows1 = read_csv(out1 / "norm-compare.csv")[1]
    rows2 = read_csv(out2 / "norm-compare.csv")[1]
    assert rows1[0]["operator_norm"] != rows2[0]["operator_norm"]
    assert rows1[0]["config_hash"] != rows2[0]["config_hash"]
