import json
from pathlib import Path

import numpy as np
import pytest

from qtherm.cli import main, parse_config
from qtherm.errors import ConfigError
from qtherm.runner import ExperimentConfig, run


def _cfg(tmp_path, experiment, **kw):
    kw.setdefault("K", 40)
    kw.setdefault("M", 6)
    kw.setdefault("seed", 3)
    kw.setdefault("threads", 2)
    kw.setdefault("out_dir", tmp_path)
    kw.setdefault("n_times", 24)
    kw.setdefault("n_series", 3)
    return ExperimentConfig(experiment=experiment, **kw)


def _read_csv(path):
    lines = Path(path).read_text().splitlines()
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def test_validate_rejects_bad_configs(tmp_path):
    with pytest.raises(ConfigError, match="unknown experiment"):
        _cfg(tmp_path, "does-not-exist").validate()
    with pytest.raises(ConfigError, match="eps0_final"):
        _cfg(tmp_path, "quench-series").validate()
    with pytest.raises(ConfigError, match="threads"):
        _cfg(tmp_path, "spectrum", threads=0).validate()
    with pytest.raises(ConfigError, match="K must be >= 3"):
        _cfg(tmp_path, "spectrum", K=2).validate()
    with pytest.raises(ConfigError, match="swept K"):
        _cfg(tmp_path, "ipr-scan", sweep_K=[2]).validate()


# ---------------------------------------------------------------------------
# experiments end to end (tiny scale)
# ---------------------------------------------------------------------------

def test_spectrum_and_overlaps(tmp_path):
    run(_cfg(tmp_path, "spectrum"))
    run(_cfg(tmp_path, "overlaps"))
    cols, rows = _read_csv(tmp_path / "spectrum__K40_g0.2_e0.2.csv")
    assert cols == ["l", "omega[W]"]
    assert len(rows) == 40
    cols, rows = _read_csv(tmp_path / "overlaps__K40_g0.2_e0.2.csv")
    assert cols == ["k", "l", "omega[W]", "overlap_sq"]
    assert len(rows) == 80  # system level + nearest bath level
    total = sum(float(r[3]) for r in rows if r[0] == "0")
    assert total == pytest.approx(1.0, abs=1e-12)


def test_ipr_scan(tmp_path):
    run(_cfg(tmp_path, "ipr-scan", sweep_K=[20, 40], sweep_gamma=[0.1, 0.5]))
    cols, rows = _read_csv(tmp_path / "ipr_scan.csv")
    assert cols == ["K", "gamma[W]", "ipr0"]
    assert len(rows) == 4
    for r in rows:
        assert 1.0 / float(r[0]) <= float(r[2]) <= 1.0


def test_static_indicator_outputs(tmp_path):
    run(_cfg(tmp_path, "static-indicator"))
    cols, rows = _read_csv(tmp_path / "static_scatter__K40_g0.2_e0.2.csv")
    assert cols == ["i", "E[W]", "T[W]", "p0", "p0_gc", "k_bath", "p_bath", "p_bath_gc"]
    assert len(rows) == 6
    for r in rows:
        assert 0.4 - 1e-9 <= float(r[2]) <= 0.5 + 1e-9
        assert 0.0 <= float(r[3]) <= 1.0
    cols, band_rows = _read_csv(tmp_path / "equilibrium_band__K40_g0.2_e0.2.csv")
    assert len(band_rows) == 2
    for r in band_rows:
        assert float(r[3]) <= float(r[4])
    cols, scal = _read_csv(tmp_path / "static_indicator_scaling.csv")
    assert cols == ["K", "gamma[W]", "M", "indicator", "bound"]
    assert float(scal[0][3]) <= float(scal[0][4]) + 0.7  # bound is statistical
    # sample cache persisted for reuse
    assert list(tmp_path.glob("samples__*.txt"))


def test_quench_experiments(tmp_path):
    run(_cfg(tmp_path, "quench-series", eps0_final=-0.2))
    cols, rows = _read_csv(tmp_path / "quench_series__K40_g0.2_e0.2_ef-0.2.csv")
    assert cols == ["sample_index", "t[1/W]", "p0"]
    assert len(rows) == 3 * 24
    cols, bands = _read_csv(tmp_path / "quench_bands__K40_g0.2_e0.2_ef-0.2.csv")
    assert [r[0] for r in bands] == ["initial", "final"]

    run(_cfg(tmp_path, "quench-ipr-scan", eps0_final=-0.2, sweep_gamma=[0.2, 0.4]))
    cols, rows = _read_csv(tmp_path / "quench_ipr_scan.csv")
    assert len(rows) == 2 and cols[-1] == "ipr0_t"

    run(_cfg(tmp_path, "quench-indicator", eps0_final=-0.2))
    cols, rows = _read_csv(tmp_path / "quench_indicator_scaling.csv")
    assert cols == ["K", "gamma[W]", "M", "t[1/W]", "indicator", "bound"]
    assert float(rows[0][3]) == pytest.approx(50.0)  # default t = 10/gamma

    run(_cfg(tmp_path, "time-average", eps0_final=-0.2))
    cols, rows = _read_csv(tmp_path / "time_average_scaling.csv")
    assert cols == ["K", "gamma[W]", "M", "indicator_inf", "sigma_av"]


def test_bath_experiments(tmp_path):
    run(_cfg(tmp_path, "bath-scenario", K=41, eps0=-0.2, sweep_gamma=[0.2, 0.8], M=4))
    cols, rows = _read_csv(tmp_path / "bath_loc_coefficient.csv")
    assert cols == ["K", "gamma[W]", "t[1/W]", "D"]
    assert all(float(r[3]) >= 0.0 for r in rows)
    cols, rows = _read_csv(tmp_path / "bath_series__K41_g0.2_e-0.2.csv")
    assert len(rows) == 3 * 24
    p0_first = [float(r[2]) for r in rows if r[0] == rows[0][0]]
    assert p0_first[0] == 0.0  # system starts empty
    cols, rows = _read_csv(tmp_path / "bath_single__K41_g0.2_e-0.2.csv")
    assert cols == ["t[1/W]", "p0_eigenstate", "p0_reference", "p0_equilibrium"]
    assert len({r[3] for r in rows}) == 1  # equilibrium value is constant

    run(_cfg(tmp_path, "bath-indicator", K=41, eps0=-0.2, sweep_gamma=[0.2, 0.8], M=4))
    cols, rows = _read_csv(tmp_path / "bath_indicator_scaling.csv")
    assert cols == ["K", "gamma[W]", "M", "t[1/W]", "indicator", "bound"]
    assert len(rows) == 2


def test_sample_experiment_and_cache_reuse(tmp_path):
    cache = tmp_path / "my_samples.txt"
    cfg = _cfg(tmp_path / "a", "sample", cache=cache)
    run(cfg)
    assert cache.exists()
    body = cache.read_bytes()
    # second run consumes the cache instead of resampling
    cfg2 = _cfg(tmp_path / "b", "static-indicator", cache=cache)
    run(cfg2)
    assert cache.read_bytes() == body
    # incompatible cache is rejected up front
    cfg3 = _cfg(tmp_path / "c", "static-indicator", cache=cache, seed=99)
    with pytest.raises(ConfigError, match="different parameters"):
        run(cfg3)


def test_manifest_contents(tmp_path):
    run(_cfg(tmp_path, "spectrum"))
    manifest = json.loads((tmp_path / "manifest__spectrum__K40_g0.2_e0.2.json").read_text())
    assert manifest["experiment"] == "spectrum"
    assert manifest["seed"] == 3
    assert manifest["files"] == ["spectrum__K40_g0.2_e0.2.csv"]
    assert "wall_time_s" in manifest and "code_version" in manifest


def test_csv_roundtrip_precision(tmp_path):
    from qtherm.runner import write_csv

    values = [np.pi, 1.0 / 3.0, 6.02214076e23, 1.17e-308]
    write_csv(tmp_path / "x.csv", ["v"], [(v,) for v in values])
    _, rows = _read_csv(tmp_path / "x.csv")
    for (r,), v in zip(rows, values):
        assert float(r) == v  # 17 significant digits round-trip exactly


def test_rerun_byte_identical_csvs(tmp_path):
    for threads, sub in ((1, "t1"), (4, "t4")):
        run(_cfg(tmp_path / sub, "static-indicator", threads=threads, seed=12))
    csvs = sorted(p.name for p in (tmp_path / "t1").glob("*.csv"))
    assert csvs
    for name in csvs:
        assert (tmp_path / "t1" / name).read_bytes() == \
            (tmp_path / "t4" / name).read_bytes()


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def test_cli_flags_and_exit_codes(tmp_path, capsys):
    out = tmp_path / "o"
    code = main(["spectrum", "--K", "12", "--gamma", "0.3", "--out", str(out),
                 "--threads", "1", "--seed", "2"])
    assert code == 0
    assert (out / "spectrum__K12_g0.3_e0.2.csv").exists()
    # config error -> exit code 2
    assert main(["quench-series", "--K", "12", "--out", str(out)]) == 2
    # budget error -> exit code 3
    code = main(["sample", "--K", "60", "--M", "100", "--dT", "0.001",
                 "--out", str(out), "--max-trials", "20000", "--threads", "1"])
    assert code == 3


def test_cli_config_file_and_overrides(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text(
        "[DEFAULT]\nK = 14\nseed = 5\nthreads = 1\n\n"
        "[spectrum]\ngamma = 0.4\nout_dir = %s\n" % (tmp_path / "from_file"))
    cfg = parse_config(["spectrum", "--config", str(ini)])
    assert cfg.K == 14 and cfg.gamma == 0.4 and cfg.seed == 5
    assert cfg.out_dir == tmp_path / "from_file"
    # flags win over the file
    cfg = parse_config(["spectrum", "--config", str(ini), "--gamma", "0.7"])
    assert cfg.gamma == 0.7
    with pytest.raises(ConfigError, match="does not exist"):
        parse_config(["spectrum", "--config", str(tmp_path / "nope.ini")])


def test_cli_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("QTHERM_THREADS", "3")
    cfg = parse_config(["spectrum", "--K", "8", "--out", str(tmp_path)])
    assert cfg.threads == 3
    monkeypatch.setenv("QTHERM_THREADS", "junk")
    with pytest.raises(ConfigError, match="QTHERM_THREADS"):
        parse_config(["spectrum", "--K", "8"])


def test_cli_sweep_lists(tmp_path):
    cfg = parse_config(["ipr-scan", "--K-list", "20,30", "--gamma-list",
                        "0.1, 0.2", "--out", str(tmp_path), "--threads", "1"])
    assert cfg.sweep_K == [20, 30]
    assert cfg.sweep_gamma == [0.1, 0.2]
