"""Coupling switched on at t=0 with the bath alone in an eigenstate.

Before the switch-on the full Hamiltonian is diagonal in the level basis, so
the initial transform is the identity and the levels themselves are the
normal modes.  Only the mean initial system occupancy matters for the system
level (parity superselection forbids coherences between its empty and
occupied states), so the initial state is (p0_init, bath bit vector).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import ensemble
from .dynamics import AmplitudeMatrix, QuenchPair, ipr_t, propagate_amplitudes
from .ensemble import ReferenceEnsemble, SamplingResult, fermi
from .model import SetupParams, Spectrum, build_resonant_level, diagonalize
from .observables import IndicatorKind, IndicatorReport


@dataclass(frozen=True)
class BathInitialState:
    """Initial system occupancy plus a bath eigenstate and its thermal match."""

    p0_init: float
    bath_occ: np.ndarray
    ref: ReferenceEnsemble
    sample_index: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p0_init <= 1.0:
            raise ValueError(f"initial system occupancy must lie in [0, 1], got {self.p0_init}")

    def mode_occupations(self) -> np.ndarray:
        """Mean occupancies of the K uncoupled modes (system first)."""
        return np.concatenate(([self.p0_init], self.bath_occ.astype(float)))


def bath_energies(params: SetupParams) -> np.ndarray:
    return -params.W / 2 + params.delta_eps * np.arange(params.K - 1)


def bath_spectrum(params: SetupParams) -> Spectrum:
    """Spectrum of the uncoupled bath block: its levels are the modes."""
    eps = bath_energies(params)
    return Spectrum(omega=eps, a=np.eye(params.K - 1))


def bath_quench_pair(params: SetupParams) -> QuenchPair:
    """Uncoupled (diagonal, identity transform) -> coupled resonant level.

    The initial spectrum keeps the original level order (system first), so
    a(0) is exactly the identity.
    """
    omega0 = np.concatenate(([params.eps0], bath_energies(params)))
    initial = Spectrum(omega=omega0, a=np.eye(params.K))
    final = diagonalize(build_resonant_level(params))
    return QuenchPair.from_spectra(initial, final)


def bath_sampling_params(params: SetupParams) -> SetupParams:
    """Sampling parameters for the half-filled bath, N_B = (K-1)//2."""
    return dataclasses.replace(params, N=(params.K - 1) // 2)


def sample_bath_states(params: SetupParams, p0_init: float = 0.0, *,
                       max_trials: int = 2_000_000_000, threads: int = 1,
                       progress=None) -> tuple[list[BathInitialState], SamplingResult]:
    """Draw M bath eigenstates inside the temperature window.

    The bath spectrum does not depend on (eps0, gamma), so one draw serves
    every coupling strength.
    """
    bparams = bath_sampling_params(params)
    result = ensemble.sample_microcanonical_window(
        bath_spectrum(params), bparams, max_trials=max_trials, threads=threads,
        progress=progress)
    states = [BathInitialState(p0_init=p0_init, bath_occ=s.occ, ref=s.ref,
                               sample_index=s.sample_index)
              for s in result.samples]
    return states, result


def localization_coefficient(a_t: AmplitudeMatrix) -> float:
    """D(t): system-level IPR with the self-overlap term removed.

    Assumes a(0) = identity (uncoupled initial basis); D(0) = 0 and
    D(t) = IPR_0(t) - |a_00(t)|^4 identically.
    """
    row0 = a_t.entries[0]
    return float(np.sum(np.abs(row0[1:]) ** 4))


def system_occupancy_bath_scenario(a_t: AmplitudeMatrix, init: BathInitialState) -> float:
    """<p_0(t)> = |a_00|^2 p0_init + sum_k |a_0k|^2 n_k."""
    w = np.abs(a_t.entries[0]) ** 2
    return float(w[0] * init.p0_init + w[1:] @ init.bath_occ.astype(float))


def _bath_reference_occupations(q: QuenchPair, ref: ReferenceEnsemble) -> np.ndarray:
    eps = q.initial.omega[1:]
    return fermi(ref.beta * (eps - ref.mu))


def indicator_ref_bath(samples: list[BathInitialState], q: QuenchPair,
                       t: float) -> IndicatorReport:
    """RMS deviation of <p_0(t)> between bath eigenstates and their reference
    thermal baths; the initial system term cancels, so the t=0 value is 0."""
    if not samples:
        raise ValueError("need at least one sample")
    n0 = int(samples[0].bath_occ.sum())
    if any(int(x.bath_occ.sum()) != n0 or x.p0_init != samples[0].p0_init for x in samples):
        raise ValueError("samples mix different bath fillings or initial occupancies")
    a_t = propagate_amplitudes(q, t)
    w = np.abs(a_t.entries[0, 1:]) ** 2
    devs = [w @ (x.bath_occ.astype(float) - _bath_reference_occupations(q, x.ref))
            for x in samples]
    value = float(np.sqrt(np.mean(np.square(devs))))
    return IndicatorReport(value=value, kind=IndicatorKind.I_REF, k=0, M=len(samples),
                           bound=0.5 * np.sqrt(localization_coefficient(a_t)))


def indicator_gc_bath_exact(q: QuenchPair, beta: float, mu: float, t: float,
                            p0_init: float = 0.0) -> IndicatorReport:
    """Exact indicator for baths drawn from the grand-canonical ensemble:
    sqrt(sum_k |a_0k(t)|^4 f_k (1 - f_k)), bounded by half sqrt(D(t))."""
    a_t = propagate_amplitudes(q, t)
    w4 = np.abs(a_t.entries[0, 1:]) ** 4
    f = fermi(beta * (q.initial.omega[1:] - mu))
    value = float(np.sqrt(np.sum(w4 * f * (1.0 - f))))
    return IndicatorReport(value=value, kind=IndicatorKind.I_GC_EXACT, k=0, M=0,
                           bound=0.5 * np.sqrt(localization_coefficient(a_t)))


def bath_occupancy_series(q: QuenchPair, states: list[BathInitialState],
                          times: np.ndarray) -> np.ndarray:
    """<p_0(t)> trajectories, one column per initial bath state."""
    occ = np.stack([x.mode_occupations() for x in states], axis=1)
    from .dynamics import system_occupancy_series

    return system_occupancy_series(q, occ, times)


def bath_reference_series(q: QuenchPair, state: BathInitialState,
                          times: np.ndarray) -> np.ndarray:
    """<p_0(t)> for the reference thermal bath of one sampled state."""
    occ = np.concatenate(([state.p0_init],
                          _bath_reference_occupations(q, state.ref)))[:, None]
    from .dynamics import system_occupancy_series

    return system_occupancy_series(q, occ, times)[:, 0]
