import math

import numpy as np
import pytest

from qtherm.model import (
    SetupParams,
    build_custom,
    build_quenched,
    build_resonant_level,
    diagonalize,
    min_gap,
)


def test_resonant_level_k4_values():
    # direct evaluation of the parameterization at K=4, W=1, gamma=0.1
    p = SetupParams(K=4, W=1.0, eps0=0.2, gamma=0.1)
    h = build_resonant_level(p)
    np.testing.assert_allclose(h.diag, [0.2, -0.5, 0.0, 0.5], atol=0)
    t_expected = math.sqrt(0.1 * 0.5 / (2 * math.pi))  # 0.08920620...
    np.testing.assert_allclose(h.border, t_expected, rtol=0, atol=0)


def test_zero_coupling_is_diagonal():
    h = build_resonant_level(SetupParams(K=7, eps0=0.1, gamma=0.0))
    assert np.all(h.border == 0.0)
    m = h.matrix()
    assert np.array_equal(m, np.diag(np.diag(m)))


def test_k3_band_edges():
    h = build_resonant_level(SetupParams(K=3, W=1.0, eps0=0.0, gamma=0.1))
    assert SetupParams(K=3).delta_eps == 1.0
    np.testing.assert_allclose(h.diag[1:], [-0.5, 0.5])


def test_param_validation():
    with pytest.raises(ValueError, match="K must be >= 3"):
        SetupParams(K=2)
    with pytest.raises(ValueError, match="bandwidth"):
        SetupParams(K=5, W=0.0)
    with pytest.raises(ValueError, match="coupling"):
        SetupParams(K=5, gamma=-0.1)
    with pytest.raises(ValueError, match="particle number"):
        SetupParams(K=5, N=9)
    assert SetupParams(K=9).N == 4  # half filling default


def test_build_custom():
    h = build_custom([0.0, 0.0], [0.3])
    np.testing.assert_array_equal(h.matrix(), [[0.0, 0.3], [0.3, 0.0]])
    single = build_custom([1.5], [])
    assert single.matrix().shape == (1, 1)
    with pytest.raises(ValueError, match="couplings"):
        build_custom([0.0, 1.0, 2.0], [0.1])


def test_build_custom_matches_resonant_level():
    p = SetupParams(K=4, W=1.0, eps0=0.2, gamma=0.1)
    h1 = build_resonant_level(p)
    h2 = build_custom(h1.diag, h1.border)
    np.testing.assert_array_equal(h1.matrix(), h2.matrix())


def test_dimer_spectrum():
    tau = 0.37
    s = diagonalize(build_custom([0.0, 0.0], [tau]))
    np.testing.assert_allclose(s.omega, [-tau, tau], atol=1e-15)
    np.testing.assert_allclose(s.a ** 2, 0.5 * np.ones((2, 2)), atol=1e-15)


def test_zero_coupling_spectrum_is_permutation():
    p = SetupParams(K=5, eps0=0.2, gamma=0.0)
    s = diagonalize(build_resonant_level(p))
    np.testing.assert_allclose(s.omega, np.sort(build_resonant_level(p).diag), atol=0)
    # each column is a basis vector
    assert np.all(np.isin(np.round(s.a, 12), [0.0, 1.0]))
    assert np.all(s.a.sum(axis=0) == 1.0)


def test_diagonalize_residual_and_signs():
    p = SetupParams(K=4, W=1.0, eps0=0.2, gamma=0.1)
    h = build_resonant_level(p)
    s = diagonalize(h)
    off = s.a.T @ h.matrix() @ s.a - np.diag(s.omega)
    assert np.max(np.abs(off)) < 1e-12
    lead = np.argmax(np.abs(s.a), axis=0)
    assert np.all(s.a[lead, np.arange(4)] > 0)


def test_quenched_pair():
    p = SetupParams(K=5, eps0=0.2, gamma=0.1, eps0_final=-0.2)
    h0, h1 = build_quenched(p)
    assert h0.diag[0] == 0.2 and h1.diag[0] == -0.2
    np.testing.assert_array_equal(h0.diag[1:], h1.diag[1:])
    np.testing.assert_array_equal(h0.border, h1.border)
    with pytest.raises(ValueError, match="eps0_final"):
        build_quenched(SetupParams(K=5))


def test_min_gap():
    s = diagonalize(build_custom([0.0, 0.0], [0.25]))
    assert min_gap(s) == pytest.approx(0.5, abs=1e-15)
    s4 = diagonalize(build_resonant_level(SetupParams(K=4, eps0=0.2, gamma=0.0)))
    assert min_gap(s4) == pytest.approx(0.2, abs=1e-14)
    assert min_gap(diagonalize(build_custom([1.0], []))) == math.inf
    coupled = diagonalize(build_resonant_level(SetupParams(K=40, eps0=0.2, gamma=0.3)))
    assert min_gap(coupled) > 0


@pytest.mark.parametrize("k", [50, 300, 1000])
def test_orthogonality_and_reconstruction(k):
    p = SetupParams(K=k, eps0=0.2, gamma=0.3)
    h = build_resonant_level(p)
    s = diagonalize(h)
    assert s.orthogonality_residual() < 1e-10
    assert np.max(np.abs(s.a @ s.a.T - np.eye(k))) < 1e-10
    recon = (s.a * s.omega) @ s.a.T
    assert np.max(np.abs(recon - h.matrix())) < 1e-9


@pytest.mark.parametrize("k", [10, 25, 50])
def test_eigenvalue_interlacing(k):
    # coupled eigenvalues interlace the bath energies (Cauchy, arrowhead)
    p = SetupParams(K=k, eps0=0.17, gamma=0.4)
    h = build_resonant_level(p)
    s = diagonalize(h)
    bath = np.sort(h.diag[1:])
    for i in range(k - 1):
        assert s.omega[i] <= bath[i] + 1e-12
        assert bath[i] <= s.omega[i + 1] + 1e-12
