"""Experiment orchestration: validates a configuration, runs the compute,
and persists deterministic CSV artifacts plus a JSON manifest.

Numbers are written with 17 significant digits and a '.' decimal separator;
re-running any configuration with the same seed yields byte-identical CSV
bodies at any thread count.  Energies are in units of W, times in 1/W.
"""

from __future__ import annotations

import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, bath_scenario, dynamics, ensemble, observables
from .errors import ConfigError
from .model import SetupParams, build_resonant_level, diagonalize

EXPERIMENTS = (
    "spectrum", "overlaps", "ipr-scan", "static-indicator", "sample",
    "quench-series", "quench-ipr-scan", "quench-indicator", "time-average",
    "bath-scenario", "bath-indicator",
)
_QUENCH_EXPERIMENTS = {"quench-series", "quench-ipr-scan", "quench-indicator",
                       "time-average"}
_SAMPLING_EXPERIMENTS = {"sample", "static-indicator", "quench-series",
                         "quench-indicator", "time-average", "bath-scenario",
                         "bath-indicator"}


@dataclass
class ExperimentConfig:
    """One experiment run: model point, optional sweeps, output wiring."""

    experiment: str
    K: int = 300
    eps0: float = 0.2
    gamma: float = 0.2
    W: float = 1.0
    eps0_final: float | None = None
    T_mid: float = 0.45
    dT: float = 0.1
    N: int | None = None
    M: int = 100
    seed: int = 0
    sweep_K: list[int] | None = None
    sweep_gamma: list[float] | None = None
    t: float | None = None
    n_times: int = 240
    n_series: int = 6
    p0_init: float = 0.0
    out_dir: Path = field(default_factory=lambda: Path("out"))
    threads: int = 1
    cache: Path | None = None
    max_trials: int = 2_000_000_000

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment '{self.experiment}'; "
                              f"choose one of {', '.join(EXPERIMENTS)}")
        if self.experiment in _QUENCH_EXPERIMENTS and self.eps0_final is None:
            raise ConfigError(f"experiment '{self.experiment}' requires eps0_final")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if self.n_times < 2 or self.n_series < 1:
            raise ConfigError("need n_times >= 2 and n_series >= 1")
        if self.W <= 0:
            raise ConfigError(f"display bandwidth must be positive, got {self.W}")
        try:
            self.point_params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        for k in self.sweep_K or []:
            if k < 3:
                raise ConfigError(f"swept K={k} is below the minimum of 3")
        if self.cache is not None:
            # one cache file serves one sampling point; bath samples do not
            # depend on gamma, so a gamma sweep is still a single point there
            n_k = len(self.sweep_K or [self.K])
            n_g = len(self.sweep_gamma or [self.gamma])
            points = n_k if self.experiment in ("bath-indicator", "bath-scenario") \
                else n_k * n_g
            if self.experiment in ("static-indicator", "quench-indicator",
                                   "time-average", "bath-indicator") and points > 1:
                raise ConfigError("--cache applies to single-point runs; drop it "
                                  "for sweeps (samples are auto-cached per point "
                                  "in the output directory)")

    def point_params(self, k: int | None = None, gamma: float | None = None) -> SetupParams:
        """Parameters of one sweep point; all energies in units of W."""
        return SetupParams(
            K=self.K if k is None else k,
            eps0=self.eps0,
            gamma=self.gamma if gamma is None else gamma,
            W=1.0,
            eps0_final=self.eps0_final,
            T_mid=self.T_mid, dT=self.dT,
            N=self.N, M=self.M, seed=self.seed,
        )

    def sweep_points(self):
        for k in self.sweep_K or [self.K]:
            for gamma in self.sweep_gamma or [self.gamma]:
                yield self.point_params(k, gamma)


# ---------------------------------------------------------------------------
# artifact writing
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path: Path, columns: list[str], rows) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _tag(p: SetupParams, quench: bool = False) -> str:
    tag = f"K{p.K}_g{p.gamma:g}_e{p.eps0:g}"
    if quench and p.eps0_final is not None:
        tag += f"_ef{p.eps0_final:g}"
    return tag


def _nearest_bath_level(diag: np.ndarray, eps0: float) -> int:
    # level index (original basis) of the bath level closest in energy to eps0
    return int(1 + np.argmin(np.abs(diag[1:] - eps0)))


class _Run:
    """Collects written files and sampling trial counts for the manifest."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.files: list[str] = []
        self.trials: dict[str, int] = {}
        cfg.out_dir.mkdir(parents=True, exist_ok=True)

    def csv(self, name: str, columns: list[str], rows) -> Path:
        path = self.cfg.out_dir / name
        write_csv(path, columns, rows)
        self.files.append(name)
        return path

    def progress(self, trials: int, accepted: int) -> None:
        rate = accepted / trials if trials else 0.0
        print(f"qtherm: {trials} trials, {accepted} accepted "
              f"(acceptance ~{rate:.3e})", file=sys.stderr)

    # -- sampling with cache reuse ------------------------------------------

    def samples(self, spectrum, p: SetupParams, kind: str = "coupled") -> ensemble.SamplingResult:
        if kind == "bath":
            fields = {"kind": kind, "K": p.K, "W": p.W, "T_mid": p.T_mid,
                      "dT": p.dT, "N": (p.K - 1) // 2, "M": p.M, "seed": p.seed}
        else:
            fields = {"kind": kind, "K": p.K, "W": p.W, "eps0": p.eps0,
                      "gamma": p.gamma, "T_mid": p.T_mid, "dT": p.dT,
                      "N": int(p.N), "M": p.M, "seed": p.seed}
        digest = ensemble.params_hash(fields)
        auto = self.cfg.out_dir / f"samples__{digest}.txt"
        explicit = Path(self.cfg.cache) if self.cfg.cache else None
        for candidate in (explicit, auto):
            if candidate is not None and candidate.exists():
                try:
                    result = ensemble.read_sample_cache(candidate, fields)
                except ValueError as exc:
                    if candidate is explicit:
                        raise ConfigError(str(exc)) from exc
                    continue  # stale auto-cache for some other point
                if len(result.samples) != p.M:
                    raise ConfigError(f"cache {candidate} holds {len(result.samples)} "
                                      f"samples, expected {p.M}")
                self.trials[digest] = result.trials
                return result
        result = ensemble.sample_microcanonical_window(
            spectrum, p, max_trials=self.cfg.max_trials, threads=self.cfg.threads,
            progress=self.progress)
        target = explicit if explicit is not None else auto
        ensemble.write_sample_cache(target, fields, result)
        if target.parent == self.cfg.out_dir:
            self.files.append(target.name)
        self.trials[digest] = result.trials
        return result

    def manifest(self, wall_time: float) -> Path:
        cfg = asdict(self.cfg)
        cfg["out_dir"] = str(self.cfg.out_dir)
        cfg["cache"] = str(self.cfg.cache) if self.cfg.cache else None
        payload = {
            "experiment": self.cfg.experiment,
            "config": cfg,
            "seed": self.cfg.seed,
            "code_version": __version__,
            "trials": self.trials,
            "wall_time_s": wall_time,
            "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
            "files": self.files,
        }
        base = self.cfg.point_params()
        path = self.cfg.out_dir / f"manifest__{self.cfg.experiment}__{_tag(base)}.json"
        with open(path, "w", encoding="ascii") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def _run_spectrum(run: _Run) -> None:
    p = run.cfg.point_params()
    s = diagonalize(build_resonant_level(p))
    run.csv(f"spectrum__{_tag(p)}.csv", ["l", "omega[W]"],
            ((l, s.omega[l]) for l in range(s.size)))


def _run_overlaps(run: _Run) -> None:
    p = run.cfg.point_params()
    h = build_resonant_level(p)
    s = diagonalize(h)
    k_bath = _nearest_bath_level(h.diag, p.eps0)
    rows = []
    for k in (0, k_bath):
        for l in range(s.size):
            rows.append((k, l, s.omega[l], s.a[k, l] ** 2))
    run.csv(f"overlaps__{_tag(p)}.csv", ["k", "l", "omega[W]", "overlap_sq"], rows)


def _run_ipr_scan(run: _Run) -> None:
    cfg = run.cfg
    gammas = cfg.sweep_gamma or list(np.linspace(0.02, 0.8, 40))
    rows = []
    for k in cfg.sweep_K or [cfg.K]:
        for gamma in gammas:
            p = cfg.point_params(k, gamma)
            s = diagonalize(build_resonant_level(p))
            rows.append((p.K, p.gamma, observables.ipr(s, 0)))
    run.csv("ipr_scan.csv", ["K", "gamma[W]", "ipr0"], rows)


def _run_sample(run: _Run) -> None:
    p = run.cfg.point_params()
    s = diagonalize(build_resonant_level(p))
    run.samples(s, p)


def _run_static_indicator(run: _Run) -> None:
    cfg = run.cfg
    scaling = []
    for p in cfg.sweep_points():
        h = build_resonant_level(p)
        s = diagonalize(h)
        k_bath = _nearest_bath_level(h.diag, p.eps0)
        result = run.samples(s, p)
        t_lo, t_hi = p.T_window
        w0, wb = s.a[0] ** 2, s.a[k_bath] ** 2
        rows = []
        for smp in result.samples:
            f = ensemble.fermi(smp.ref.beta * (s.omega - smp.ref.mu))
            occ = smp.occ.astype(float)
            rows.append((smp.sample_index, smp.energy, smp.ref.T,
                         float(w0 @ occ), float(w0 @ f),
                         k_bath, float(wb @ occ), float(wb @ f)))
        run.csv(f"static_scatter__{_tag(p)}.csv",
                ["i", "E[W]", "T[W]", "p0", "p0_gc", "k_bath", "p_bath", "p_bath_gc"],
                rows)
        band_rows = []
        for k in (0, k_bath):
            lo, hi = observables.equilibrium_band(s, p.N, t_lo, t_hi, k)
            band_rows.append((k, t_lo, t_hi, lo, hi))
        run.csv(f"equilibrium_band__{_tag(p)}.csv",
                ["k", "T_lo[W]", "T_hi[W]", "lo", "hi"], band_rows)
        report = observables.indicator_ref(result.samples, s, 0)
        scaling.append((p.K, p.gamma, report.M, report.value, report.bound))
    run.csv("static_indicator_scaling.csv",
            ["K", "gamma[W]", "M", "indicator", "bound"], scaling)


def _run_quench_series(run: _Run) -> None:
    cfg = run.cfg
    p = cfg.point_params()
    q = dynamics.make_quench_pair(p)
    result = run.samples(q.initial, p)
    times = dynamics.time_grid(p.gamma, n=cfg.n_times)
    chosen = result.samples[: cfg.n_series]
    occ = np.stack([s.occ for s in chosen], axis=1).astype(float)
    series = dynamics.system_occupancy_series(q, occ, times)
    rows = []
    for col, smp in enumerate(chosen):
        for ti, t in enumerate(times):
            rows.append((smp.sample_index, t, series[ti, col]))
    run.csv(f"quench_series__{_tag(p, quench=True)}.csv",
            ["sample_index", "t[1/W]", "p0"], rows)
    t_lo, t_hi = p.T_window
    bands = [("initial", *observables.equilibrium_band(q.initial, p.N, t_lo, t_hi, 0)),
             ("final", *observables.equilibrium_band(q.final, p.N, t_lo, t_hi, 0))]
    run.csv(f"quench_bands__{_tag(p, quench=True)}.csv", ["which", "lo", "hi"], bands)


def _run_quench_ipr_scan(run: _Run) -> None:
    cfg = run.cfg
    gammas = cfg.sweep_gamma or list(np.linspace(0.02, 0.8, 40))
    rows = []
    for k in cfg.sweep_K or [cfg.K]:
        for gamma in gammas:
            p = cfg.point_params(k, gamma)
            q = dynamics.make_quench_pair(p)
            t = cfg.t if cfg.t is not None else 10.0 / p.gamma
            rows.append((p.K, p.gamma, t,
                         dynamics.ipr_t(dynamics.propagate_amplitudes(q, t), 0)))
    run.csv("quench_ipr_scan.csv", ["K", "gamma[W]", "t[1/W]", "ipr0_t"], rows)


def _run_quench_indicator(run: _Run) -> None:
    rows = []
    for p in run.cfg.sweep_points():
        q = dynamics.make_quench_pair(p)
        result = run.samples(q.initial, p)
        t = run.cfg.t if run.cfg.t is not None else 10.0 / p.gamma
        report = dynamics.indicator_ref_t(result.samples, q, t)
        rows.append((p.K, p.gamma, report.M, t, report.value, report.bound))
    run.csv("quench_indicator_scaling.csv",
            ["K", "gamma[W]", "M", "t[1/W]", "indicator", "bound"], rows)


def _run_time_average(run: _Run) -> None:
    rows = []
    for p in run.cfg.sweep_points():
        q = dynamics.make_quench_pair(p)
        result = run.samples(q.initial, p)
        inf_report = dynamics.infinite_time_indicator(result.samples, q)
        rows.append((p.K, p.gamma, inf_report.M, inf_report.value,
                     dynamics.sigma_av(result.samples, q)))
    run.csv("time_average_scaling.csv",
            ["K", "gamma[W]", "M", "indicator_inf", "sigma_av"], rows)


def _run_bath_scenario(run: _Run) -> None:
    cfg = run.cfg
    # localization-coefficient scan over the sweep
    gammas = cfg.sweep_gamma or list(np.linspace(0.02, 0.8, 40))
    rows = []
    for k in cfg.sweep_K or [cfg.K]:
        for gamma in gammas:
            p = cfg.point_params(k, gamma)
            q = bath_scenario.bath_quench_pair(p)
            t = cfg.t if cfg.t is not None else 10.0 / p.gamma
            a_t = dynamics.propagate_amplitudes(q, t)
            rows.append((p.K, p.gamma, t, bath_scenario.localization_coefficient(a_t)))
    run.csv("bath_loc_coefficient.csv", ["K", "gamma[W]", "t[1/W]", "D"], rows)

    # trajectories and single-state comparison at the base point
    p = cfg.point_params()
    q = bath_scenario.bath_quench_pair(p)
    result = run.samples(bath_scenario.bath_spectrum(p),
                         bath_scenario.bath_sampling_params(p), kind="bath")
    states = [bath_scenario.BathInitialState(p0_init=cfg.p0_init, bath_occ=s.occ,
                                             ref=s.ref, sample_index=s.sample_index)
              for s in result.samples]
    times = dynamics.time_grid(p.gamma, n=cfg.n_times)
    chosen = states[: cfg.n_series]
    series = bath_scenario.bath_occupancy_series(q, chosen, times)
    srows = []
    for col, st in enumerate(chosen):
        for ti, t in enumerate(times):
            srows.append((st.sample_index, t, series[ti, col]))
    run.csv(f"bath_series__{_tag(p)}.csv", ["sample_index", "t[1/W]", "p0"], srows)

    n_total = (p.K - 1) // 2 + cfg.p0_init
    t_lo, t_hi = p.T_window
    lo, hi = observables.equilibrium_band(q.final, n_total, t_lo, t_hi, 0)
    run.csv(f"bath_band__{_tag(p)}.csv", ["lo", "hi"], [(lo, hi)])

    first = states[0]
    eig = bath_scenario.bath_occupancy_series(q, [first], times)[:, 0]
    ref = bath_scenario.bath_reference_series(q, first, times)
    equil = observables.occupancy_gc(q.final, first.ref.beta, first.ref.mu, 0)
    run.csv(f"bath_single__{_tag(p)}.csv",
            ["t[1/W]", "p0_eigenstate", "p0_reference", "p0_equilibrium"],
            ((t, eig[i], ref[i], equil) for i, t in enumerate(times)))


def _run_bath_indicator(run: _Run) -> None:
    cfg = run.cfg
    rows = []
    for k in cfg.sweep_K or [cfg.K]:
        p_k = cfg.point_params(k)
        result = run.samples(bath_scenario.bath_spectrum(p_k),
                             bath_scenario.bath_sampling_params(p_k), kind="bath")
        # the bath spectrum is coupling-independent: one draw serves every gamma
        states = [bath_scenario.BathInitialState(p0_init=cfg.p0_init, bath_occ=s.occ,
                                                 ref=s.ref, sample_index=s.sample_index)
                  for s in result.samples]
        for gamma in cfg.sweep_gamma or [cfg.gamma]:
            p = cfg.point_params(k, gamma)
            q = bath_scenario.bath_quench_pair(p)
            t = cfg.t if cfg.t is not None else 10.0 / p.gamma
            report = bath_scenario.indicator_ref_bath(states, q, t)
            rows.append((p.K, p.gamma, report.M, t, report.value, report.bound))
    run.csv("bath_indicator_scaling.csv",
            ["K", "gamma[W]", "M", "t[1/W]", "indicator", "bound"], rows)


_DISPATCH = {
    "spectrum": _run_spectrum,
    "overlaps": _run_overlaps,
    "ipr-scan": _run_ipr_scan,
    "sample": _run_sample,
    "static-indicator": _run_static_indicator,
    "quench-series": _run_quench_series,
    "quench-ipr-scan": _run_quench_ipr_scan,
    "quench-indicator": _run_quench_indicator,
    "time-average": _run_time_average,
    "bath-scenario": _run_bath_scenario,
    "bath-indicator": _run_bath_indicator,
}


def run(cfg: ExperimentConfig) -> Path:
    """Execute one experiment; returns the manifest path."""
    cfg.validate()
    started = time.perf_counter()
    runner = _Run(cfg)
    _DISPATCH[cfg.experiment](runner)
    return runner.manifest(time.perf_counter() - started)
