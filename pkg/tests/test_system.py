"""Tests for the dressed-state core: spectra, transitions, drive couplings.

Expected numbers are frozen from direct evaluation of the closed forms
(independent of the module under test) at omega_r = 6000 MHz, g = 180 MHz.
"""

import math

import numpy as np
import pytest

from jcpulse.system import (
    DressedLabel,
    DriveOperator,
    SystemParams,
    build_static_hamiltonian,
    dispersive_approximations,
    doublet_energies,
    dressed_basis_labels,
    dressed_eigensystem,
    dressed_index,
    drive_matrix_elements,
    min_frequency_separation,
    transition_frequencies,
)

RESONANT = SystemParams(omega_r=6000.0, delta=0.0, g=180.0, n_max=6)


def test_params_validation():
    with pytest.raises(ValueError):
        SystemParams(omega_r=6000.0, delta=0.0, g=0.0, n_max=4)
    with pytest.raises(ValueError):
        SystemParams(omega_r=6000.0, delta=0.0, g=180.0, n_max=0)
    with pytest.raises(ValueError):
        SystemParams(omega_r=-1.0, delta=0.0, g=180.0, n_max=4)


def test_label_round_trip_and_order():
    labels = dressed_basis_labels(3)
    assert [str(x) for x in labels] == ["0", "1-", "1+", "2-", "2+", "3-", "3+"]
    for i, lab in enumerate(labels):
        assert dressed_index(lab, 3) == i
        assert DressedLabel.parse(str(lab)) == lab
    with pytest.raises(ValueError):
        DressedLabel.parse("x2")
    with pytest.raises(ValueError):
        DressedLabel(2, "")


def test_hamiltonian_matrix_elements():
    params = SystemParams(omega_r=6000.0, delta=0.0, g=180.0, n_max=1)
    H = build_static_hamiltonian(params)
    # basis order |0,0>, |0,1>, |1,0>, |1,1>
    assert H[params.product_index(1, 0), params.product_index(1, 0)] == 6000.0
    assert H[params.product_index(1, 0), params.product_index(0, 1)] == 180.0
    assert H[params.product_index(1, 0), params.product_index(0, 0)] == 0.0
    np.testing.assert_allclose(H, H.T)


def test_smallest_truncation_spectrum():
    # n_max = 1 keeps exactly the ground state and the first doublet
    params = SystemParams(omega_r=6000.0, delta=0.0, g=180.0, n_max=1)
    states = dressed_eigensystem(params)
    assert [str(s.label) for s in states] == ["0", "1-", "1+"]
    np.testing.assert_allclose(
        [s.energy for s in states], [0.0, 5820.0, 6180.0], atol=1e-9
    )


def test_resonant_doublet_energies():
    states = {str(s.label): s for s in dressed_eigensystem(RESONANT)}
    assert states["0"].energy == pytest.approx(0.0, abs=1e-10)
    # E_{n,+-} = n omega_r -+ g sqrt(n) at zero detuning
    assert states["1-"].energy == pytest.approx(5820.0, abs=1e-9)
    assert states["1+"].energy == pytest.approx(6180.0, abs=1e-9)
    assert states["4-"].energy == pytest.approx(24000.0 - 360.0, abs=1e-9)
    assert states["4+"].energy == pytest.approx(24000.0 + 360.0, abs=1e-9)


def test_eigensystem_random_parameters():
    # residuals, orthonormality, closed-form match over a parameter sweep
    rng = np.random.default_rng(7)
    for _ in range(25):
        params = SystemParams(
            omega_r=float(rng.uniform(1000, 9000)),
            delta=float(rng.uniform(-2000, 2000)),
            g=float(rng.uniform(1, 400)),
            n_max=int(rng.integers(1, 9)),
        )
        H = build_static_hamiltonian(params)
        states = dressed_eigensystem(params)
        assert len(states) == params.dressed_dim
        V = np.column_stack([s.vector for s in states])
        np.testing.assert_allclose(V.T @ V, np.eye(params.dressed_dim), atol=1e-12)
        scale = np.linalg.norm(H)
        for s in states:
            resid = np.linalg.norm(H @ s.vector - s.energy * s.vector)
            assert resid <= 1e-10 * scale
            if not s.label.is_ground:
                e_ref = doublet_energies(params, s.label.n)[
                    0 if s.label.branch == "-" else 1
                ]
                assert s.energy == pytest.approx(e_ref, abs=1e-9 * max(1, abs(e_ref)))


def test_eigenvector_gauge_and_mixing_angle():
    # at zero detuning both doublet components have magnitude 1/sqrt(2),
    # with <0, n| component positive
    states = dressed_eigensystem(RESONANT)
    for s in states[1:]:
        n = s.label.n
        c0 = s.vector[RESONANT.product_index(0, n)]
        c1 = s.vector[RESONANT.product_index(1, n - 1)]
        assert c0 == pytest.approx(1 / math.sqrt(2), abs=1e-12)
        sign = -1.0 if s.label.branch == "-" else 1.0
        assert c1 == pytest.approx(sign / math.sqrt(2), abs=1e-12)


def test_transition_families_resonant():
    t0 = transition_frequencies(RESONANT, 0)
    assert t0.w_plus == pytest.approx(6180.0, abs=1e-9)
    assert t0.w_minus == pytest.approx(5820.0, abs=1e-9)
    assert t0.w_up == pytest.approx(6180.0, abs=1e-9)
    assert t0.w_down == pytest.approx(5820.0, abs=1e-9)
    t1 = transition_frequencies(RESONANT, 1)
    # 6000 +- (sqrt(2) - 1) * 180 and 6000 +- (sqrt(2) + 1) * 180
    assert t1.w_plus == pytest.approx(6074.558441227157, abs=1e-9)
    assert t1.w_minus == pytest.approx(5925.441558772843, abs=1e-9)
    assert t1.w_up == pytest.approx(6434.558441227157, abs=1e-9)
    assert t1.w_down == pytest.approx(5565.441558772843, abs=1e-9)
    with pytest.raises(ValueError):
        transition_frequencies(RESONANT, RESONANT.n_max)


def test_transition_sum_rule_and_energy_consistency():
    rng = np.random.default_rng(11)
    for _ in range(20):
        params = SystemParams(
            omega_r=float(rng.uniform(1000, 9000)),
            delta=float(rng.uniform(-1500, 1500)),
            g=float(rng.uniform(1, 400)),
            n_max=int(rng.integers(2, 9)),
        )
        energies = {str(s.label): s.energy for s in dressed_eigensystem(params)}
        for n in range(0, params.n_max - 1):
            t = transition_frequencies(params, n)
            assert t.w_up + t.w_down == pytest.approx(2 * params.omega_r, abs=1e-9)
            if n >= 1:
                assert t.w_plus == pytest.approx(
                    energies[f"{n+1}+"] - energies[f"{n}+"], abs=1e-9
                )
                assert t.w_minus == pytest.approx(
                    energies[f"{n+1}-"] - energies[f"{n}-"], abs=1e-9
                )
                assert t.w_up == pytest.approx(
                    energies[f"{n+1}+"] - energies[f"{n}-"], abs=1e-9
                )
                assert t.w_down == pytest.approx(
                    energies[f"{n+1}-"] - energies[f"{n}+"], abs=1e-9
                )


def test_sigma_x_elements_at_zero_detuning():
    M = drive_matrix_elements(RESONANT, DriveOperator.QUBIT_TRANSVERSE)
    idx = lambda lab: dressed_index(DressedLabel.parse(lab), RESONANT.n_max)
    assert M[idx("1+"), idx("0")] == pytest.approx(+1 / math.sqrt(2), abs=1e-12)
    assert M[idx("1-"), idx("0")] == pytest.approx(-1 / math.sqrt(2), abs=1e-12)
    for n in range(1, RESONANT.n_max):
        assert M[idx(f"{n+1}+"), idx(f"{n}-")] == pytest.approx(+0.5, abs=1e-12)
        assert M[idx(f"{n+1}-"), idx(f"{n}+")] == pytest.approx(-0.5, abs=1e-12)
        # same-branch couplings exist too and have the same magnitude
        assert M[idx(f"{n+1}-"), idx(f"{n}-")] == pytest.approx(-0.5, abs=1e-12)
        assert M[idx(f"{n+1}+"), idx(f"{n}+")] == pytest.approx(+0.5, abs=1e-12)
    # sigma_x changes the excitation number by exactly one: no coupling
    # within a doublet or beyond neighbouring doublets
    assert M[idx("1-"), idx("1+")] == pytest.approx(0.0, abs=1e-12)
    assert M[idx("3-"), idx("1-")] == pytest.approx(0.0, abs=1e-12)


def test_longitudinal_and_position_elements():
    Mz = drive_matrix_elements(RESONANT, DriveOperator.QUBIT_LONGITUDINAL)
    idx = lambda lab: dressed_index(DressedLabel.parse(lab), RESONANT.n_max)
    # sigma_+ sigma_- leaves the ground state alone and mixes each doublet
    assert Mz[idx("0"), idx("0")] == pytest.approx(0.0, abs=1e-12)
    for n in range(1, RESONANT.n_max + 1):
        assert Mz[idx(f"{n}+"), idx(f"{n}-")] == pytest.approx(-0.5, abs=1e-12)
        assert Mz[idx(f"{n}-"), idx(f"{n}-")] == pytest.approx(0.5, abs=1e-12)
    Mx = drive_matrix_elements(RESONANT, DriveOperator.RESONATOR_POSITION)
    assert Mx[idx("1-"), idx("0")] == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert Mx[idx("1+"), idx("0")] == pytest.approx(1 / math.sqrt(2), abs=1e-12)


def test_drive_matrices_hermitian_random():
    rng = np.random.default_rng(3)
    for _ in range(10):
        params = SystemParams(
            omega_r=float(rng.uniform(1000, 9000)),
            delta=float(rng.uniform(-1500, 1500)),
            g=float(rng.uniform(1, 400)),
            n_max=int(rng.integers(1, 8)),
        )
        for kind in DriveOperator:
            M = drive_matrix_elements(params, kind)
            assert M.shape == (params.dressed_dim, params.dressed_dim)
            np.testing.assert_allclose(M, M.T, atol=1e-12)


def test_dispersive_limit():
    params = SystemParams(omega_r=6000.0, delta=1800.0, g=180.0, n_max=4)
    approx = dispersive_approximations(params, 0)
    exact = transition_frequencies(params, 0)
    # Stark family: omega_q + (2n+1) g^2 / delta
    assert approx.w_up == pytest.approx(7818.0, abs=1e-9)
    assert abs(approx.w_up - exact.w_up) < 0.2
    # Kerr family: omega_r +- [g^2/delta - (2n+1) g^4/delta^3]
    assert approx.w_plus == pytest.approx(6017.82, abs=1e-9)
    assert abs(approx.w_plus - exact.w_plus) < 0.01
    assert abs(approx.w_minus - exact.w_minus) < 0.01
    with pytest.raises(ValueError):
        dispersive_approximations(RESONANT, 0)


def test_dispersive_error_shrinks_with_detuning():
    for n in (0, 2):
        errs = []
        for delta in (1800.0, 3600.0, 7200.0):
            params = SystemParams(omega_r=30000.0, delta=delta, g=180.0, n_max=4)
            a = dispersive_approximations(params, n)
            t = transition_frequencies(params, n)
            errs.append(abs(a.w_plus - t.w_plus) + abs(a.w_up - t.w_up))
        assert errs[0] > errs[1] > errs[2]


def test_min_frequency_separation():
    assert min_frequency_separation([5820.0, 6434.6, 5433.7]) == pytest.approx(386.3)
    assert min_frequency_separation([1.0, 2.0]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        min_frequency_separation([6000.0])
