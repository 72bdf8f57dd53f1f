"""Brute-force verifiers used by the test suite.

Full many-body enumeration (hard-capped at K = 14) and step-wise RK4
propagation of the amplitude matrix.  Never a production path; inputs stay
tiny by construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .dynamics import AmplitudeMatrix, QuenchPair
from .model import Spectrum

MAX_ENUM_K = 14


@dataclass(frozen=True)
class EnumerationTable:
    """Every eigenstate with its energy, particle number, Boltzmann weight."""

    occupations: np.ndarray
    energies: np.ndarray
    particle_numbers: np.ndarray
    weights: np.ndarray


def enumerate_states(s: Spectrum, n_filter: int | None = None,
                     beta: float = 0.0, mu: float = 0.0) -> EnumerationTable:
    """Complete, duplicate-free enumeration (all 2^K states, or C(K, N))."""
    k = s.size
    if k > MAX_ENUM_K:
        raise ValueError(f"enumeration is capped at K={MAX_ENUM_K}, got K={k}")
    if n_filter is None:
        codes = np.arange(2 ** k, dtype=np.uint64)
        occ = ((codes[:, None] >> np.arange(k, dtype=np.uint64)) & 1).astype(np.uint8)
    else:
        rows = list(itertools.combinations(range(k), n_filter))
        occ = np.zeros((len(rows), k), dtype=np.uint8)
        for i, idx in enumerate(rows):
            occ[i, list(idx)] = 1
    energies = occ @ s.omega
    numbers = occ.sum(axis=1).astype(int)
    logw = -beta * (energies - mu * numbers)
    w = np.exp(logw - logw.max())
    return EnumerationTable(occupations=occ, energies=energies,
                            particle_numbers=numbers, weights=w / w.sum())


def weighted_indicator(table: EnumerationTable, s: Spectrum, k: int) -> float:
    """Weighted standard deviation of <p_k>_i over the enumerated states."""
    p = table.occupations @ (s.a[k] ** 2)
    mean = float(table.weights @ p)
    return float(np.sqrt(table.weights @ (p - mean) ** 2))


def ode_propagate(q: QuenchPair, t: float, dt: float = 1e-3) -> AmplitudeMatrix:
    """Classic RK4 integration of da/dt = i H' a from a(0) = a."""
    if dt > 1e-2:
        raise ValueError(f"step must be <= 1e-2 (units 1/W) for the stated accuracy, got {dt}")
    h = q.final.a @ (q.final.omega[:, None] * q.final.a.T)
    a = q.initial.a.astype(complex)
    n_full, rem = divmod(t, dt)
    steps = [dt] * int(n_full) + ([rem] if rem > 1e-15 else [])

    def deriv(m):
        return 1j * (h @ m)

    for step in steps:
        k1 = deriv(a)
        k2 = deriv(a + 0.5 * step * k1)
        k3 = deriv(a + 0.5 * step * k2)
        k4 = deriv(a + step * k3)
        a = a + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return AmplitudeMatrix(t=t, entries=a)
