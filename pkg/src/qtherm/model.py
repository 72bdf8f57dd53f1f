"""Single-particle Hamiltonian of the resonant-level setup and its spectrum.

A single level at energy ``eps0`` is tunnel-coupled to ``K - 1`` bath levels
that are equally spaced over a boxcar band of width ``W``.  The one-particle
matrix is an arrowhead: row/column 0 holds the couplings, the bath block is
diagonal.  All energies are quoted in units of the bandwidth (``W = 1`` by
default) and hbar = k_B = 1 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SetupParams:
    """Model and sampling parameters for one experiment point.

    (K, W, eps0, gamma) define the Hamiltonian, ``eps0_final`` the
    post-quench system energy, and (T_mid, dT, N, M, seed) control
    microcanonical-window sampling.  ``N`` defaults to half filling.
    """

    K: int
    eps0: float = 0.2
    gamma: float = 0.2
    W: float = 1.0
    eps0_final: float | None = None
    T_mid: float = 0.45
    dT: float = 0.1
    N: int | None = None
    M: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.K < 3:
            raise ValueError(
                f"K must be >= 3 so the bath spacing W/(K-2) is finite, got K={self.K}"
            )
        if self.W <= 0:
            raise ValueError(f"bandwidth W must be positive, got {self.W}")
        if self.gamma < 0:
            raise ValueError(f"coupling strength must be >= 0, got {self.gamma}")
        if self.dT <= 0:
            raise ValueError(f"temperature window width must be positive, got {self.dT}")
        if self.M < 1:
            raise ValueError(f"sample count must be >= 1, got {self.M}")
        if self.N is None:
            object.__setattr__(self, "N", self.K // 2)
        if not 0 <= self.N <= self.K:
            raise ValueError(f"particle number must lie in [0, K], got N={self.N}")

    @property
    def delta_eps(self) -> float:
        """Interlevel spacing of the bath band."""
        return self.W / (self.K - 2)

    @property
    def T_window(self) -> tuple[float, float]:
        return (self.T_mid - self.dT / 2, self.T_mid + self.dT / 2)


@dataclass(frozen=True)
class SingleParticleHamiltonian:
    """Arrowhead matrix: level 0 coupled to every other level, bath diagonal.

    ``diag`` holds the K level energies, ``border`` the K-1 couplings t_k
    between level 0 and level k.
    """

    diag: np.ndarray
    border: np.ndarray

    def __post_init__(self):
        diag = _frozen_array(self.diag)
        border = _frozen_array(self.border)
        if diag.ndim != 1 or diag.size < 1:
            raise ValueError("diag must be a non-empty 1-d array of level energies")
        if border.shape != (diag.size - 1,):
            raise ValueError(
                f"need {diag.size - 1} couplings for {diag.size} levels, got {border.size}"
            )
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "border", border)

    @property
    def size(self) -> int:
        return self.diag.size

    def matrix(self) -> np.ndarray:
        """Dense symmetric K x K matrix."""
        h = np.diag(self.diag)
        h[0, 1:] = self.border
        h[1:, 0] = self.border
        return h


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues ``omega`` and the real orthogonal transform ``a``.

    Column l of ``a`` is the normalized eigenvector of omega_l, so
    a[k, l] is the overlap of level k with normal mode l.
    """

    omega: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        omega = _frozen_array(self.omega)
        a = _frozen_array(self.a)
        if a.shape != (omega.size, omega.size):
            raise ValueError(f"transform shape {a.shape} does not match {omega.size} modes")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "a", a)

    @property
    def size(self) -> int:
        return self.omega.size

    def orthogonality_residual(self) -> float:
        """Max-abs entry of a^T a - 1 (identity for an orthogonal transform)."""
        return float(np.max(np.abs(self.a.T @ self.a - np.eye(self.size))))


def build_resonant_level(params: SetupParams) -> SingleParticleHamiltonian:
    """Arrowhead Hamiltonian of the resonant-level setup.

    Bath levels sit at -W/2 + Delta*(k-1); the uniform couplings are fixed
    by requiring that gamma equals the golden-rule broadening
    2*pi*t_k**2/Delta of the system level.
    """
    k = np.arange(1, params.K)
    diag = np.empty(params.K)
    diag[0] = params.eps0
    diag[1:] = -params.W / 2 + params.delta_eps * (k - 1)
    t = math.sqrt(params.gamma * params.delta_eps / (2 * math.pi))
    return SingleParticleHamiltonian(diag=diag, border=np.full(params.K - 1, t))


def build_custom(levels, couplings) -> SingleParticleHamiltonian:
    """Arrowhead matrix with explicit level energies and couplings.

    Mostly a test fixture for analytically solvable cases (dimer,
    uncoupled band, ...).
    """
    return SingleParticleHamiltonian(diag=np.asarray(levels, float),
                                     border=np.asarray(couplings, float))


def build_quenched(params: SetupParams) -> tuple[SingleParticleHamiltonian, SingleParticleHamiltonian]:
    """Pre- and post-quench Hamiltonians (only eps0 changes)."""
    if params.eps0_final is None:
        raise ValueError("params.eps0_final is required for a quench")
    import dataclasses

    final = dataclasses.replace(params, eps0=params.eps0_final)
    return build_resonant_level(params), build_resonant_level(final)


def diagonalize(h: SingleParticleHamiltonian) -> Spectrum:
    """Spectral decomposition with a deterministic sign convention.

    Eigenvalues come out ascending; each eigenvector is flipped so its
    largest-magnitude component is positive, which makes outputs
    byte-stable across platforms and LAPACK builds.
    """
    try:
        omega, a = np.linalg.eigh(h.matrix())
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed on K={h.size} arrowhead matrix: {exc}") from exc
    lead = np.argmax(np.abs(a), axis=0)
    signs = np.sign(a[lead, np.arange(h.size)])
    signs[signs == 0.0] = 1.0
    return Spectrum(omega=omega, a=a * signs)


def min_gap(s: Spectrum) -> float:
    """Smallest spacing between adjacent eigenvalues (+inf for K=1).

    Used as a nondegeneracy guard before infinite-time-average formulas;
    the gap is strictly positive whenever all couplings are nonzero.
    """
    if s.size < 2:
        return math.inf
    return float(np.min(np.diff(np.sort(s.omega))))
