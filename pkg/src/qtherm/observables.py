"""Static occupancies, IPR, equilibrium bands, and thermalization indicators.

A level occupancy is a weighted average of normal-mode occupancies,
<p_k> = sum_l a_kl^2 <n_l>; every indicator here is an RMS deviation of
per-eigenstate occupancies from a thermal reference.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from .ensemble import SampledEigenstate, _solve_g, fermi
from .model import Spectrum


class IndicatorKind(enum.Enum):
    I_REF = "I_ref"
    I_GC_EXACT = "I_gc_exact"
    I_REF_INFINITY = "I_ref_infinity"


@dataclass(frozen=True)
class IndicatorReport:
    """A thermalization indicator value with its companion bound, if any.

    ``M`` is the sample count behind a sampled estimate (0 for exact kinds);
    ``bound`` is the rigorous companion (half the square root of the IPR or
    of the localization coefficient) when one applies.
    """

    value: float
    kind: IndicatorKind
    k: int
    M: int
    bound: float | None = None


def occupancy_static(s: Spectrum, occ: np.ndarray) -> np.ndarray:
    """Level occupancies <p_k> = sum_l a_kl^2 n_l for one eigenstate."""
    occ = np.asarray(occ)
    if occ.shape != (s.size,):
        raise ValueError(f"occupation length {occ.shape} does not match K={s.size}")
    return (s.a ** 2) @ occ.astype(float)


def occupancy_gc(s: Spectrum, beta: float, mu: float, k: int | None = None):
    """Grand-canonical level occupancy; all levels when ``k`` is None."""
    f = fermi(beta * (s.omega - mu))
    if k is None:
        return (s.a ** 2) @ f
    return float(s.a[k] ** 2 @ f)


def ipr(s: Spectrum, k: int) -> float:
    """Inverse participation ratio of level k over the normal modes."""
    return float(np.sum(s.a[k] ** 4))


def _static_pairs(samples: list[SampledEigenstate], s: Spectrum, k: int):
    if not samples:
        raise ValueError("need at least one sample")
    n0 = int(samples[0].occ.sum())
    if any(int(x.occ.sum()) != n0 for x in samples):
        raise ValueError("samples mix different particle numbers")
    w = s.a[k] ** 2
    p = np.array([float(w @ x.occ) for x in samples])
    p_gc = np.array([float(w @ fermi(x.ref.beta * (s.omega - x.ref.mu))) for x in samples])
    return p, p_gc


def indicator_ref(samples: list[SampledEigenstate], s: Spectrum, k: int) -> IndicatorReport:
    """RMS deviation of <p_k>_i from each sample's own reference-state value."""
    p, p_gc = _static_pairs(samples, s, k)
    value = float(np.sqrt(np.mean((p - p_gc) ** 2)))
    return IndicatorReport(value=value, kind=IndicatorKind.I_REF, k=k, M=len(samples),
                           bound=0.5 * np.sqrt(ipr(s, k)))


def indicator_gc_exact(s: Spectrum, beta: float, mu: float, k: int) -> IndicatorReport:
    """Exact grand-canonical indicator sqrt(sum_l a_kl^4 f_l (1 - f_l)).

    Equals the weighted standard deviation of <p_k>_i over all eigenstates
    with Boltzmann weights, and never exceeds half the square root of the
    IPR.
    """
    f = fermi(beta * (s.omega - mu))
    value = float(np.sqrt(np.sum(s.a[k] ** 4 * f * (1.0 - f))))
    return IndicatorReport(value=value, kind=IndicatorKind.I_GC_EXACT, k=k, M=0,
                           bound=0.5 * np.sqrt(ipr(s, k)))


def chebyshev_bound(ipr_k: float, xi: float) -> float:
    """Upper bound IPR_k / (4 xi^2) on the deviating fraction, clamped to [0, 1]."""
    if xi <= 0:
        raise ValueError(f"deviation threshold must be positive, got {xi}")
    return float(min(max(ipr_k / (4.0 * xi * xi), 0.0), 1.0))


def deviation_fraction(samples: list[SampledEigenstate], s: Spectrum,
                       k: int, xi: float) -> float:
    """Fraction of samples whose <p_k>_i deviates from the sample mean by >= xi.

    The sample mean stands in for the microcanonical average, which is not
    available at sampling scale.
    """
    if xi <= 0:
        raise ValueError(f"deviation threshold must be positive, got {xi}")
    p, _ = _static_pairs(samples, s, k)
    return float(np.mean(np.abs(p - p.mean()) >= xi))


def equilibrium_band(s: Spectrum, n_target: float, t_lo: float, t_hi: float,
                     k: int) -> tuple[float, float]:
    """Range of grand-canonical occupancies of level k over a temperature window.

    Evaluated at the two window edges only; occupancy is monotone in T in
    every probed regime, which is spot-checked on a 5-point grid (a warning
    is emitted if violated, in which case the band may be underestimated).
    """
    if not 0 < t_lo <= t_hi:
        raise ValueError(f"need 0 < T_lo <= T_hi, got ({t_lo}, {t_hi})")

    def occ_at(t):
        beta = 1.0 / t
        g = _solve_g(s.omega, beta, n_target)
        return float(s.a[k] ** 2 @ fermi(beta * s.omega - g))

    grid = [occ_at(t) for t in np.linspace(t_lo, t_hi, 5)] if t_hi > t_lo else []
    if grid:
        diffs = np.diff(grid)
        if not (np.all(diffs >= -1e-12) or np.all(diffs <= 1e-12)):
            warnings.warn(
                f"occupancy of level {k} is not monotone across [{t_lo}, {t_hi}]; "
                "band endpoints may not bracket the full range", stacklevel=2)
    lo, hi = occ_at(t_lo), occ_at(t_hi)
    return (min(lo, hi), max(lo, hi))
