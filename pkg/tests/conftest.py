"""Shared fixtures.

Window-sampling is the expensive part of the suite, so accepted sample sets
are persisted under tests/_cache using the package's own cache-file format
and reused across runs.  Delete the directory to force resampling.
"""

from pathlib import Path

import numpy as np
import pytest

from qtherm import bath_scenario, ensemble
from qtherm.model import SetupParams, build_resonant_level, diagonalize

CACHE_DIR = Path(__file__).parent / "_cache"


def coupled_fields(k, gamma, m=100, seed=0):
    return {"kind": "coupled", "K": k, "W": 1.0, "eps0": 0.2, "gamma": gamma,
            "T_mid": 0.45, "dT": 0.1, "N": k // 2, "M": m, "seed": seed}


def bath_fields(k, m, seed=0):
    return {"kind": "bath", "K": k, "W": 1.0, "T_mid": 0.45, "dT": 0.1,
            "N": (k - 1) // 2, "M": m, "seed": seed}


class SampleStore:
    """Lazily sampled, disk-cached eigenstate sets keyed by (K, gamma)."""

    def __init__(self):
        CACHE_DIR.mkdir(exist_ok=True)
        self._mem = {}

    def coupled(self, k, gamma, m=100, seed=0):
        """(spectrum, SamplingResult) for the eps0=0.2 Hamiltonian."""
        key = ("coupled", k, gamma, m, seed)
        if key in self._mem:
            return self._mem[key]
        fields = coupled_fields(k, gamma, m, seed)
        path = CACHE_DIR / f"samples__{ensemble.params_hash(fields)}.txt"
        params = SetupParams(K=k, eps0=0.2, gamma=gamma, M=m, seed=seed)
        spectrum = diagonalize(build_resonant_level(params))
        if path.exists():
            result = ensemble.read_sample_cache(path, fields)
        else:
            result = ensemble.sample_microcanonical_window(spectrum, params, threads=2)
            ensemble.write_sample_cache(path, fields, result)
        self._mem[key] = (spectrum, result)
        return spectrum, result

    def bath(self, k, m=24, seed=0):
        """SamplingResult over the uncoupled bath spectrum (gamma-independent)."""
        key = ("bath", k, m, seed)
        if key in self._mem:
            return self._mem[key]
        fields = bath_fields(k, m, seed)
        path = CACHE_DIR / f"samples__{ensemble.params_hash(fields)}.txt"
        params = SetupParams(K=k, M=m, seed=seed)
        if path.exists():
            result = ensemble.read_sample_cache(path, fields)
        else:
            result = ensemble.sample_microcanonical_window(
                bath_scenario.bath_spectrum(params),
                bath_scenario.bath_sampling_params(params), threads=2)
            ensemble.write_sample_cache(path, fields, result)
        self._mem[key] = result
        return result


@pytest.fixture(scope="session")
def samples():
    return SampleStore()


@pytest.fixture
def rng():
    return np.random.default_rng(20240915)
