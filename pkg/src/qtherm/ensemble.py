"""Many-body eigenstates, microcanonical-window sampling, reference thermal states.

An eigenstate is a length-K bit vector of normal-mode occupancies.  Sampling
draws uniformly random fixed-N bit vectors and keeps those whose reference
temperature T_i falls inside the requested window; because the eigenstate
energy is strictly increasing in T at fixed N, the acceptance test is an
energy-window pre-filter, and the two-variable (beta_i, mu_i) solve runs only
for accepted states.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import BudgetError, NumericError
from .model import SetupParams, Spectrum

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

# Part of the sampling-stream definition: batch b of this fixed size is drawn
# from Philox seeded with SeedSequence(entropy=seed, spawn_key=(b,)), so the
# accepted set is invariant under worker count.
BATCH_SIZE = 16384

#: default absolute tolerance on the particle-number sum
TOL_N = 1e-10
#: default absolute tolerance on the energy sum (energies in units of W)
TOL_E = 1e-10
_MAX_BISECT = 200


def fermi(x):
    """Fermi function 1/(1 + exp(x)), overflow-safe for any |x|."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    ex = np.exp(-x[pos])
    out[pos] = ex / (1.0 + ex)
    out[~pos] = 1.0 / (1.0 + np.exp(x[~pos]))
    return out if out.ndim else float(out)


def grand_canonical_occupations(s: Spectrum, beta: float, mu: float) -> np.ndarray:
    """Normal-mode occupations f(beta * (omega_l - mu)) as a vector."""
    return fermi(beta * (s.omega - mu))


def eigenstate_energy(s: Spectrum, occ: np.ndarray) -> float:
    """Energy of the eigenstate with normal-mode occupancies ``occ``."""
    occ = np.asarray(occ)
    if occ.shape != s.omega.shape:
        raise ValueError(f"occupation length {occ.shape} does not match K={s.size}")
    return float(occ @ s.omega)


# ---------------------------------------------------------------------------
# fixed-N subset sampling
# ---------------------------------------------------------------------------

def _subset_from_uniforms(u: np.ndarray, k: int) -> np.ndarray:
    """Partial Fisher-Yates: N uniforms in [0,1) -> uniform N-subset of range(k)."""
    n = u.size
    idx = np.arange(k)
    for j in range(n):
        r = min(j + int(u[j] * (k - j)), k - 1)
        idx[j], idx[r] = idx[r], idx[j]
    return idx[:n]


def sample_fixed_n(k: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random occupation bit vector with exactly n of k modes filled."""
    if not 0 <= n <= k:
        raise ValueError(f"need 0 <= N <= K, got N={n}, K={k}")
    occ = np.zeros(k, dtype=np.uint8)
    if n:
        occ[_subset_from_uniforms(rng.random(n), k)] = 1
    return occ


def _batch_energies_numpy(omega: np.ndarray, u: np.ndarray) -> np.ndarray:
    # reference implementation; bit-identical to the numba kernel
    b, n = u.shape
    k = omega.size
    idx = np.broadcast_to(np.arange(k), (b, k)).copy()
    rows = np.arange(b)
    e = np.zeros(b)
    for j in range(n):
        r = np.minimum(j + (u[:, j] * (k - j)).astype(np.int64), k - 1)
        tmp = idx[rows, j].copy()
        idx[rows, j] = idx[rows, r]
        idx[rows, r] = tmp
        e += omega[idx[rows, j]]
    return e


if _HAVE_NUMBA:

    @numba.njit(nogil=True, cache=True)
    def _batch_energies_numba(omega, u):  # pragma: no cover - exercised via wrapper
        b, n = u.shape
        k = omega.shape[0]
        idx = np.arange(k)
        e = np.empty(b)
        for row in range(b):
            s = 0.0
            for j in range(n):
                r = j + int(u[row, j] * (k - j))
                if r >= k:
                    r = k - 1
                tmp = idx[j]
                idx[j] = idx[r]
                idx[r] = tmp
                s += omega[idx[j]]
            e[row] = s
            for j in range(n - 1, -1, -1):
                r = j + int(u[row, j] * (k - j))
                if r >= k:
                    r = k - 1
                tmp = idx[j]
                idx[j] = idx[r]
                idx[r] = tmp
        return e


def _batch_energies(omega: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Selection-order energy sums for a batch of uniform fixed-N draws."""
    if _HAVE_NUMBA:
        return _batch_energies_numba(omega, u)
    return _batch_energies_numpy(omega, u)


# ---------------------------------------------------------------------------
# reference thermal state
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReferenceEnsemble:
    """Grand-canonical (beta, mu) matched to an eigenstate's (E, N)."""

    beta: float
    mu: float
    T: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.T is None:
            t = math.inf if self.beta == 0.0 else 1.0 / self.beta
            object.__setattr__(self, "T", t)


@dataclass(frozen=True)
class SampledEigenstate:
    """An accepted eigenstate with its reference thermal state."""

    occ: np.ndarray
    ref: ReferenceEnsemble
    sample_index: int
    energy: float


@dataclass(frozen=True)
class SamplingResult:
    """Accepted samples plus the total number of trials consumed."""

    samples: list[SampledEigenstate]
    trials: int

    @property
    def acceptance(self) -> float:
        return len(self.samples) / self.trials if self.trials else 0.0

    def occupation_matrix(self) -> np.ndarray:
        """(K, M) matrix with one occupation vector per column."""
        return np.stack([s.occ for s in self.samples], axis=1).astype(float)


def _solve_g(omega: np.ndarray, beta: float, n_target: float,
             tol: float = TOL_N) -> float:
    """Bisect g = beta*mu so that sum_l f(beta*omega_l - g) = n_target.

    The particle-number sum is strictly increasing in g for either sign of
    beta, so bisection converges unconditionally.
    """
    x = beta * omega
    # f saturates within ~40 units of the step, hence the guaranteed bracket
    lo = float(np.min(x)) - 45.0
    hi = float(np.max(x)) + 45.0
    g = 0.5 * (lo + hi)
    for _ in range(_MAX_BISECT):
        g = 0.5 * (lo + hi)
        n = float(np.sum(fermi(x - g)))
        if abs(n - n_target) < tol:
            return g
        if n < n_target:
            lo = g
        else:
            hi = g
    raise NumericError(
        f"chemical-potential bisection stalled at beta={beta}",
        residuals={"n_residual": n - n_target},
    )


def _energy_at_beta(omega: np.ndarray, beta: float, n_target: float) -> tuple[float, float]:
    g = _solve_g(omega, beta, n_target)
    e = float(np.sum(omega * fermi(beta * omega - g)))
    return e, g


def solve_reference(s: Spectrum, e_target: float, n_target: float,
                    tol_n: float = TOL_N, tol_e: float = TOL_E) -> ReferenceEnsemble:
    """Solve the Fermi-Dirac sums for (beta, mu) matching (E, N).

    Nested solve: for trial beta, mu follows from bisection on the monotone
    particle-number sum; beta itself from a bracketed root of the energy
    residual (the energy is strictly decreasing in beta at fixed N).
    Negative beta (energies above the infinite-temperature mean) is a valid
    result and is returned, not rejected.
    """
    omega = np.sort(s.omega)
    k = omega.size
    if not 0 < n_target < k:
        raise ValueError(f"need 0 < N < K for a thermal match, got N={n_target}, K={k}")
    nf = math.floor(n_target)
    frac = n_target - nf
    e_min = float(omega[:nf].sum()) + frac * float(omega[nf])
    e_max = float(omega[k - nf:].sum()) + (frac * float(omega[k - nf - 1]) if frac else 0.0)
    if not e_min < e_target < e_max:
        raise ValueError(
            f"E={e_target} outside the achievable range ({e_min}, {e_max}) at N={n_target}"
        )

    def residual(beta):
        return _energy_at_beta(omega, beta, n_target)[0] - e_target

    # expand a bracket; residual is decreasing in beta
    lo, hi = -1.0, 1.0
    for _ in range(40):
        if residual(lo) > 0:
            break
        lo *= 8.0
    for _ in range(40):
        if residual(hi) < 0:
            break
        hi *= 8.0
    try:
        beta = brentq(residual, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                      maxiter=_MAX_BISECT)
    except (ValueError, RuntimeError) as exc:
        raise NumericError(
            f"reference solve failed for E={e_target}, N={n_target}: {exc}",
            residuals={"bracket": (lo, hi)},
        ) from exc

    g = _solve_g(omega, beta, n_target, tol=tol_n)
    if beta == 0.0:
        if abs(g) > 1e-9:
            raise NumericError(
                "chemical potential diverges at infinite temperature away from half filling",
                residuals={"beta_mu": g},
            )
        mu = 0.0
    else:
        mu = g / beta

    f = fermi(beta * omega - g)
    res_n = abs(float(np.sum(f)) - n_target)
    res_e = abs(float(np.sum(omega * f)) - e_target)
    if res_n > 10 * tol_n or res_e > max(10 * tol_e, 1e-8 * abs(e_target)):
        raise NumericError(
            f"reference solve did not converge for E={e_target}, N={n_target}",
            residuals={"n_residual": res_n, "e_residual": res_e},
        )
    return ReferenceEnsemble(beta=beta, mu=mu)


def energy_window_for_temperature(s: Spectrum, n_target: float,
                                  t_lo: float, t_hi: float) -> tuple[float, float]:
    """Map a temperature window to the equivalent energy window at fixed N.

    E(T) is strictly increasing in T at fixed N, so membership
    T_i in [t_lo, t_hi] is equivalent to E_i in the returned interval.
    """
    if not 0 < t_lo <= t_hi:
        raise ValueError(f"need 0 < T_lo <= T_hi, got ({t_lo}, {t_hi})")
    e_lo = _energy_at_beta(s.omega, 1.0 / t_lo, n_target)[0]
    e_hi = _energy_at_beta(s.omega, 1.0 / t_hi, n_target)[0]
    return e_lo, e_hi


# ---------------------------------------------------------------------------
# window sampling
# ---------------------------------------------------------------------------

def _batch_rng(seed: int, batch: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(
        np.random.SeedSequence(entropy=seed, spawn_key=(batch,))))


def sample_microcanonical_window(s: Spectrum, params: SetupParams, *,
                                 max_trials: int = 2_000_000_000,
                                 threads: int = 1,
                                 progress=None,
                                 progress_every: int = 10_000_000) -> SamplingResult:
    """Draw params.M fixed-N eigenstates with T_i inside params.T_window.

    Rejection sampling over uniform fixed-N occupation vectors with the
    energy-window pre-filter; the (beta_i, mu_i) solve runs only for accepted
    states.  The accepted set depends only on (spectrum, params), never on
    the thread count.  ``progress(trials, accepted)`` is invoked roughly
    every ``progress_every`` trials.
    """
    k = s.size
    n, m = int(params.N), int(params.M)
    if not 0 < n < k:
        raise ValueError(f"window sampling needs 0 < N < K, got N={n}, K={k}")
    t_lo, t_hi = params.T_window
    e_lo, e_hi = energy_window_for_temperature(s, n, t_lo, t_hi)
    omega = np.ascontiguousarray(s.omega)

    def scan(batch: int):
        u = _batch_rng(params.seed, batch).random((BATCH_SIZE, n))
        e = _batch_energies(omega, u)
        rows = np.nonzero((e >= e_lo) & (e <= e_hi))[0]
        return rows, u[rows].copy()

    accepted: list[tuple[int, int, np.ndarray]] = []  # (batch, row, bits)
    stop_batch = None
    next_batch = 0
    last_report = 0
    workers = max(1, int(threads))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        while stop_batch is None:
            if next_batch * BATCH_SIZE >= max_trials:
                raise BudgetError(
                    f"no {m} samples within {next_batch * BATCH_SIZE} trials "
                    f"(accepted {len(accepted)} so far)",
                    trials=next_batch * BATCH_SIZE,
                    accepted=len(accepted),
                )
            wave = range(next_batch, next_batch + workers)
            for batch, (rows, u_hits) in zip(wave, pool.map(scan, wave)):
                if stop_batch is not None:
                    continue
                for row, u_row in zip(rows, u_hits):
                    occ = np.zeros(k, dtype=np.uint8)
                    occ[_subset_from_uniforms(u_row, k)] = 1
                    accepted.append((batch, int(row), occ))
                if len(accepted) >= m:
                    stop_batch = batch
            next_batch += workers
            trials_now = (next_batch if stop_batch is None else stop_batch + 1) * BATCH_SIZE
            if progress is not None and trials_now - last_report >= progress_every:
                progress(trials_now, len(accepted))
                last_report = trials_now

    trials = (stop_batch + 1) * BATCH_SIZE
    samples = []
    for i, (_, _, occ) in enumerate(accepted[:m]):
        e_i = eigenstate_energy(s, occ)
        samples.append(SampledEigenstate(
            occ=occ, ref=solve_reference(s, e_i, n), sample_index=i, energy=e_i))
    return SamplingResult(samples=samples, trials=trials)


# ---------------------------------------------------------------------------
# sample cache file
# ---------------------------------------------------------------------------

_CACHE_MAGIC = "# qtherm-samples v1"


def params_hash(fields: dict) -> str:
    """16-hex-digit digest of a canonical key=value rendering."""
    canon = ";".join(f"{k}={fields[k]:.17g}" if isinstance(fields[k], float)
                     else f"{k}={fields[k]}" for k in sorted(fields))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def occupation_to_hex(occ: np.ndarray) -> str:
    """Bits packed little-endian by mode index into a lowercase hex string."""
    value = 0
    for l in np.nonzero(occ)[0]:
        value |= 1 << int(l)
    width = (occ.size + 3) // 4
    return format(value, f"0{width}x")


def hex_to_occupation(text: str, k: int) -> np.ndarray:
    value = int(text, 16)
    occ = np.zeros(k, dtype=np.uint8)
    for l in range(k):
        occ[l] = (value >> l) & 1
    return occ


def write_sample_cache(path, fields: dict, result: SamplingResult) -> None:
    """Persist accepted samples: header with params hash, one record per state."""
    h = params_hash(fields)
    seed = fields.get("seed", 0)
    # number of modes = bit-vector length (K-1 for bath spectra, K otherwise)
    nmodes = result.samples[0].occ.size if result.samples else fields["K"]
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{_CACHE_MAGIC} hash={h} seed={seed} nmodes={nmodes} "
                 f"trials={result.trials}\n")
        for smp in result.samples:
            fh.write(f"{smp.sample_index} {smp.energy:.17g} {smp.ref.beta:.17g} "
                     f"{smp.ref.mu:.17g} {occupation_to_hex(smp.occ)}\n")


def read_sample_cache(path, fields: dict | None = None) -> SamplingResult:
    """Load a sample cache, verifying the params hash when ``fields`` is given."""
    with open(path, encoding="ascii") as fh:
        header = fh.readline().rstrip("\n")
        if not header.startswith(_CACHE_MAGIC):
            raise ValueError(f"{path} is not a qtherm sample cache")
        meta = dict(part.split("=", 1) for part in header[len(_CACHE_MAGIC):].split())
        if fields is not None and meta["hash"] != params_hash(fields):
            raise ValueError(
                f"sample cache {path} was generated with different parameters "
                f"(hash {meta['hash']} != {params_hash(fields)})"
            )
        k = int(meta["nmodes"])
        samples = []
        for line in fh:
            idx, e, beta, mu, bits = line.split()
            samples.append(SampledEigenstate(
                occ=hex_to_occupation(bits, k),
                ref=ReferenceEnsemble(beta=float(beta), mu=float(mu)),
                sample_index=int(idx),
                energy=float(e),
            ))
    return SamplingResult(samples=samples, trials=int(meta["trials"]))
