"""Quench dynamics: amplitude propagation, time-dependent occupancies,
infinite-time averages and temporal fluctuations.

The Hamiltonian quench changes only the system level energy; propagation
uses the final spectrum's eigendecomposition, a(t) = b e^{i nu t} b^T a,
which is exact at any t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import SampledEigenstate, fermi
from .model import SetupParams, Spectrum, build_quenched, diagonalize, min_gap
from .observables import IndicatorKind, IndicatorReport

#: degeneracy guard for infinite-time-average formulas (units of W)
GAP_TOL = 1e-12


@dataclass(frozen=True)
class QuenchPair:
    """Initial and final spectra plus the orthogonal mode overlap G = a^T b."""

    initial: Spectrum
    final: Spectrum
    overlap: np.ndarray

    @classmethod
    def from_spectra(cls, initial: Spectrum, final: Spectrum) -> "QuenchPair":
        if initial.size != final.size:
            raise ValueError("initial and final spectra must have equal size")
        return cls(initial=initial, final=final, overlap=initial.a.T @ final.a)

    @property
    def size(self) -> int:
        return self.initial.size


def make_quench_pair(params: SetupParams) -> QuenchPair:
    """Diagonalize the pre- and post-quench Hamiltonians."""
    h0, h1 = build_quenched(params)
    return QuenchPair.from_spectra(diagonalize(h0), diagonalize(h1))


@dataclass(frozen=True)
class AmplitudeMatrix:
    """Time-evolved overlaps a_kl(t); column-unitary and row-normalized."""

    t: float
    entries: np.ndarray


def propagate_amplitudes(q: QuenchPair, t: float) -> AmplitudeMatrix:
    """a(t) = b diag(e^{i nu t}) b^T a via the final spectrum.

    t = 0 returns the initial transform exactly (not through the
    decomposition, which would add rounding noise).
    """
    if t == 0.0:
        return AmplitudeMatrix(t=0.0, entries=q.initial.a.astype(complex))
    b = q.final.a
    phases = np.exp(1j * q.final.omega * t)
    return AmplitudeMatrix(t=t, entries=b @ (phases[:, None] * (b.T @ q.initial.a)))


def unitarity_residual(a_t: AmplitudeMatrix) -> float:
    """Max deviation of column norms and row norms from 1."""
    p = np.abs(a_t.entries) ** 2
    return float(max(np.max(np.abs(p.sum(axis=0) - 1.0)),
                     np.max(np.abs(p.sum(axis=1) - 1.0))))


def occupancy_t(a_t: AmplitudeMatrix, occ: np.ndarray) -> np.ndarray:
    """Level occupancies <p_k(t)> = sum_l |a_kl(t)|^2 n_l."""
    occ = np.asarray(occ)
    if occ.shape != (a_t.entries.shape[0],):
        raise ValueError(f"occupation length {occ.shape} does not match K={a_t.entries.shape[0]}")
    return (np.abs(a_t.entries) ** 2) @ occ.astype(float)


def ipr_t(a_t: AmplitudeMatrix, k: int) -> float:
    """Time-dependent inverse participation ratio of level k."""
    return float(np.sum(np.abs(a_t.entries[k]) ** 4))


def mode_correlator(q: QuenchPair, occ: np.ndarray, l: int, m: int) -> float:
    """Correlator <f_l^dag f_m> of final-Hamiltonian modes in an eigenstate
    of the initial Hamiltonian (real, since the mode overlap is real)."""
    k = q.size
    if not (0 <= l < k and 0 <= m < k):
        raise ValueError(f"mode indices ({l}, {m}) out of range for K={k}")
    g = q.overlap
    return float(np.sum(g[:, l] * g[:, m] * np.asarray(occ, float)))


def _check_gap(q: QuenchPair, gap_tol: float):
    gap = min_gap(q.final)
    if gap <= gap_tol:
        raise ValueError(
            f"final spectrum has a near-degeneracy (gap {gap:.3e} <= {gap_tol:.3e}); "
            "infinite-time averages are not well defined")


def time_averaged_occupancy(q: QuenchPair, occ: np.ndarray,
                            gap_tol: float = GAP_TOL) -> float:
    """Infinite-time average of the system occupancy after the quench.

    Valid only for a nondegenerate final spectrum, which holds whenever all
    tunnel couplings are nonzero.
    """
    _check_gap(q, gap_tol)
    w = q.final.a[0] ** 2
    return float(w @ ((q.overlap ** 2).T @ np.asarray(occ, float)))


def temporal_std(q: QuenchPair, occ: np.ndarray, gap_tol: float = GAP_TOL) -> float:
    """Temporal standard deviation of the system occupancy around its
    infinite-time average (zero for stationary states)."""
    _check_gap(q, gap_tol)
    w = q.final.a[0] ** 2
    g = q.overlap
    c = g.T @ (np.asarray(occ, float)[:, None] * g)
    total = float(w @ (c ** 2) @ w)
    diag = float(np.sum(w ** 2 * np.diag(c) ** 2))
    return float(np.sqrt(max(total - diag, 0.0)))


def occupancy_gc_final(q: QuenchPair, beta: float, mu: float) -> float:
    """System occupancy of the final-Hamiltonian thermal state at (beta, mu)."""
    w = q.final.a[0] ** 2
    return float(w @ fermi(beta * (q.final.omega - mu)))


def infinite_time_indicator(samples: list[SampledEigenstate], q: QuenchPair,
                            gap_tol: float = GAP_TOL) -> IndicatorReport:
    """RMS deviation of per-eigenstate infinite-time averages from the
    thermal system occupancy of the final Hamiltonian at each sample's own
    reference (beta_i, mu_i)."""
    if not samples:
        raise ValueError("need at least one sample")
    devs = [time_averaged_occupancy(q, x.occ, gap_tol)
            - occupancy_gc_final(q, x.ref.beta, x.ref.mu) for x in samples]
    value = float(np.sqrt(np.mean(np.square(devs))))
    return IndicatorReport(value=value, kind=IndicatorKind.I_REF_INFINITY, k=0,
                           M=len(samples))


def sigma_av(samples: list[SampledEigenstate], q: QuenchPair,
             gap_tol: float = GAP_TOL) -> float:
    """Sample average of the temporal standard deviations."""
    if not samples:
        raise ValueError("need at least one sample")
    return float(np.mean([temporal_std(q, x.occ, gap_tol) for x in samples]))


def indicator_ref_t(samples: list[SampledEigenstate], q: QuenchPair,
                    t: float) -> IndicatorReport:
    """RMS deviation at time t between eigenstate and reference-state
    evolutions of the system occupancy.

    Both evolve under the final Hamiltonian from states diagonal in the
    initial normal modes, so each reduces to row 0 of |a(t)|^2 contracted
    with the respective mode occupancies.  Bounded by half the square root
    of IPR_0(t) up to sampling noise.
    """
    if not samples:
        raise ValueError("need at least one sample")
    a_t = propagate_amplitudes(q, t)
    w = np.abs(a_t.entries[0]) ** 2
    devs = [w @ (x.occ.astype(float)
                 - fermi(x.ref.beta * (q.initial.omega - x.ref.mu)))
            for x in samples]
    value = float(np.sqrt(np.mean(np.square(devs))))
    return IndicatorReport(value=value, kind=IndicatorKind.I_REF, k=0, M=len(samples),
                           bound=0.5 * np.sqrt(ipr_t(a_t, 0)))


def system_occupancy_series(q: QuenchPair, occ_matrix: np.ndarray,
                            times: np.ndarray) -> np.ndarray:
    """<p_0(t)> for many occupation vectors on a common time grid.

    Row-0 fast path of the spectral propagator: cost O(n_t K^2) instead of
    O(n_t K^3).  ``occ_matrix`` is (K, n_states); fractional mode occupancies
    (thermal references) are allowed.  Returns (n_t, n_states).
    """
    times = np.asarray(times, float)
    occ_matrix = np.asarray(occ_matrix, float)
    row0 = _row0_series(q, times)
    out = (np.abs(row0) ** 2) @ occ_matrix
    at_zero = times == 0.0
    if np.any(at_zero):  # keep the exact-t=0 contract of propagate_amplitudes
        out[at_zero] = (q.initial.a[0] ** 2) @ occ_matrix
    return out


def _row0_series(q: QuenchPair, times: np.ndarray) -> np.ndarray:
    bt_a = q.final.a.T @ q.initial.a
    b0 = q.final.a[0]
    phases = np.exp(1j * np.outer(times, q.final.omega))
    return (phases * b0) @ bt_a


def ipr0_series(q: QuenchPair, times: np.ndarray) -> np.ndarray:
    """IPR of the system level on a time grid (row-0 fast path)."""
    times = np.asarray(times, float)
    out = (np.abs(_row0_series(q, times)) ** 4).sum(axis=1)
    at_zero = times == 0.0
    if np.any(at_zero):
        out[at_zero] = np.sum(q.initial.a[0] ** 4)
    return out


def time_grid(gamma: float, *, n: int = 240, t_max: float | None = None) -> np.ndarray:
    """Geometric-then-linear grid over [0, 12/gamma] (default 240 points)."""
    if gamma <= 0:
        raise ValueError("time grids are parameterized by a positive coupling strength")
    if t_max is None:
        t_max = 12.0 / gamma
    n_geo = max(n // 4, 8)
    pivot = min(1.0 / gamma, t_max / 3.0)
    geo = np.geomspace(pivot * 1e-2, pivot, n_geo, endpoint=False)
    lin = np.linspace(pivot, t_max, n - n_geo - 1)
    return np.concatenate(([0.0], geo, lin))
