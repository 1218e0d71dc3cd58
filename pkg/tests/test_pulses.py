"""Tests for pulse synthesis: amplitudes, carriers, envelopes, transfer model.

Frozen numbers come from direct closed-form evaluation at omega_r = 6000,
g = 180, delta = 0 (see the matching literals in test_system.py); the
rotating-frame propagator is cross-checked against scipy's expm.
"""

import json
import math

import numpy as np
import pytest
import scipy.linalg

from jcpulse.system import (
    PHASE_PER_MHZ_NS,
    DressedLabel,
    DriveOperator,
    SystemParams,
    min_frequency_separation,
)
from jcpulse.pulses import (
    Pulse,
    Tone,
    analytic_transfer_pulse,
    cook_shore_amplitudes,
    evaluate_drive,
    ladder_basis,
    load_pulse,
    pulse_from_dict,
    pulse_to_dict,
    rwa_hamiltonian,
    rwa_transfer_fidelity,
    save_pulse,
    zigzag_frequencies,
)

RESONANT = SystemParams(omega_r=6000.0, delta=0.0, g=180.0, n_max=7)


def test_cook_shore_amplitudes():
    np.testing.assert_allclose(
        cook_shore_amplitudes(4, 1.0),
        [2.8284271247461903, 4.898979485566356, 4.898979485566356, 4.0],
        rtol=1e-13,
    )
    np.testing.assert_allclose(
        cook_shore_amplitudes(2, 1.0), [2.0, 2.8284271247461903], rtol=1e-13
    )
    with pytest.raises(ValueError):
        cook_shore_amplitudes(0, 1.0)
    with pytest.raises(ValueError):
        cook_shore_amplitudes(3, -1.0)


def test_cook_shore_amplitude_bound():
    # 2 sqrt(n (N+1-n)) peaks at n = (N+1)/2, so the bound (N+1) Omega_0
    # is attained exactly at the middle rung when N is odd
    for N in range(1, 25):
        amps = cook_shore_amplitudes(N, 1.0)
        assert len(amps) == N
        assert max(amps) <= N + 1
        if N % 2 == 1 and N >= 3:  # first rung (n=1) uses sqrt(2N) instead
            assert max(amps) == pytest.approx(N + 1, rel=1e-14)
        else:
            assert max(amps) < N + 1


def test_ladder_basis_shape():
    assert [str(x) for x in ladder_basis(1)] == ["0", "1-"]
    assert [str(x) for x in ladder_basis(4)] == ["0", "1+", "2-", "3+", "4-"]
    assert [str(x) for x in ladder_basis(5)] == ["0", "1-", "2+", "3-", "4+", "5-"]
    for N in range(1, 12):
        ladder = ladder_basis(N)
        assert len(ladder) == N + 1
        assert ladder[0] == DressedLabel.ground()
        assert ladder[-1] == DressedLabel.minus(N)
        # consecutive rungs alternate branch
        for a, b in zip(ladder[1:], ladder[2:]):
            assert a.branch != b.branch


def test_zigzag_frequencies_frozen():
    np.testing.assert_allclose(zigzag_frequencies(RESONANT, 1), [5820.0], rtol=1e-13)
    np.testing.assert_allclose(
        zigzag_frequencies(RESONANT, 3),
        [5820.0, 6434.558441227156, 5433.672413410444],
        rtol=1e-13,
    )
    freqs = zigzag_frequencies(RESONANT, 4)
    np.testing.assert_allclose(
        freqs,
        [6180.0, 5565.441558772844, 6566.327586589556, 5328.230854637601],
        rtol=1e-13,
    )
    assert min_frequency_separation(freqs) == pytest.approx(237.21070413524285)
    with pytest.raises(ValueError):
        zigzag_frequencies(RESONANT, RESONANT.n_max + 1)


def test_zigzag_carriers_separated_across_detuning():
    for delta in (-300.0, 0.0, 250.0, 900.0):
        params = SystemParams(omega_r=6000.0, delta=delta, g=180.0, n_max=8)
        for N in range(2, 7):
            freqs = zigzag_frequencies(params, N)
            assert min_frequency_separation(freqs) > 1.0


def test_tone_and_pulse_validation():
    with pytest.raises(ValueError):
        Tone(carrier=-5.0)
    with pytest.raises(ValueError):
        Tone(carrier=100.0, a_coeffs=(1.0,), b_coeffs=())
    tone = Tone(carrier=100.0, a_coeffs=(1.0,), b_coeffs=(0.0,))
    with pytest.raises(ValueError):
        Pulse(DriveOperator.QUBIT_TRANSVERSE, -1.0, (tone,))
    with pytest.raises(ValueError):
        Pulse(DriveOperator.QUBIT_TRANSVERSE, 10.0, ())
    with pytest.raises(ValueError):
        Pulse(DriveOperator.QUBIT_TRANSVERSE, 10.0, (tone,), constant_amps=(1.0, 2.0))


def test_evaluate_drive_single_tone():
    # one tone, one harmonic: A(T/2) = 2 a^(1), carrier at an integer number
    # of cycles, so f(T/2) = 2 a^(1) exactly
    pulse = Pulse(
        DriveOperator.QUBIT_TRANSVERSE,
        duration=50.0,
        tones=(Tone(carrier=6000.0, a_coeffs=(10.0,), b_coeffs=(0.0,)),),
    )
    assert evaluate_drive(pulse, 25.0) == pytest.approx(20.0, abs=1e-9)
    assert evaluate_drive(pulse, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert evaluate_drive(pulse, 50.0) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(ValueError):
        evaluate_drive(pulse, -0.1)
    with pytest.raises(ValueError):
        evaluate_drive(pulse, 50.1)


def test_evaluate_drive_matches_direct_sum():
    # random multi-tone pulse against a straightforward reimplementation
    rng = np.random.default_rng(5)
    tones = tuple(
        Tone(
            carrier=float(rng.uniform(1000, 8000)),
            a_coeffs=tuple(rng.normal(size=3)),
            b_coeffs=tuple(rng.normal(size=3)),
        )
        for _ in range(4)
    )
    const = tuple(rng.normal(size=4))
    pulse = Pulse(DriveOperator.QUBIT_TRANSVERSE, 40.0, tones, constant_amps=const)
    ts = np.linspace(0.0, 40.0, 101)
    expected = np.zeros_like(ts)
    for c0, tone in zip(const, tones):
        amp_a = c0 + sum(
            a * (1 - np.cos(2 * np.pi * k * ts / 40.0))
            for k, a in enumerate(tone.a_coeffs, start=1)
        )
        amp_b = sum(
            b * np.sin(2 * np.pi * k * ts / 40.0)
            for k, b in enumerate(tone.b_coeffs, start=1)
        )
        expected += amp_a * np.cos(2e-3 * np.pi * tone.carrier * ts)
        expected += amp_b * np.sin(2e-3 * np.pi * tone.carrier * ts)
    np.testing.assert_allclose(evaluate_drive(pulse, ts), expected, atol=1e-12)


def test_optimizer_envelopes_vanish_at_endpoints():
    rng = np.random.default_rng(9)
    for _ in range(10):
        tones = tuple(
            Tone(
                carrier=float(rng.uniform(1000, 8000)),
                a_coeffs=tuple(rng.normal(size=2)),
                b_coeffs=tuple(rng.normal(size=2)),
            )
            for _ in range(3)
        )
        pulse = Pulse(DriveOperator.QUBIT_TRANSVERSE, 25.0, tones)
        assert abs(evaluate_drive(pulse, 0.0)) < 1e-12
        assert abs(evaluate_drive(pulse, 25.0)) < 1e-10


def test_rwa_hamiltonian_bonds():
    H = rwa_hamiltonian(cook_shore_amplitudes(4, 1.0), 4)
    bonds = np.diag(H, k=1)
    np.testing.assert_allclose(
        bonds, [1.0, 1.224744871391589, 1.224744871391589, 1.0], rtol=1e-13
    )
    np.testing.assert_allclose(np.diag(H), 0.0, atol=0)
    with pytest.raises(ValueError):
        rwa_hamiltonian([1.0, 2.0], 4)


def test_rwa_equals_collective_spin():
    # Cook-Shore amplitudes reduce the ladder to Omega_0 J_x for spin N/2
    for N in range(1, 9):
        H = rwa_hamiltonian(cook_shore_amplitudes(N, 1.0), N)
        j = N / 2.0
        m = np.arange(-j, j)  # lower index of each bond
        jx_bonds = 0.5 * np.sqrt((j - m) * (j + m + 1))
        np.testing.assert_allclose(np.diag(H, k=1), jx_bonds, atol=1e-12)


def test_rwa_transfer_pi_pulse_perfect():
    for N in range(1, 7):
        omega0 = 1.0
        T = math.pi / (PHASE_PER_MHZ_NS * omega0)  # 500 ns
        F = rwa_transfer_fidelity(cook_shore_amplitudes(N, omega0), N, T)
        assert abs(F - 1.0) < 1e-10
        # half the time gives an incomplete transfer
        assert rwa_transfer_fidelity(cook_shore_amplitudes(N, omega0), N, T / 2) < 0.9


def test_rwa_transfer_against_expm():
    rng = np.random.default_rng(2)
    for _ in range(8):
        N = int(rng.integers(1, 7))
        amps = rng.uniform(0.5, 6.0, size=N)
        T = float(rng.uniform(20, 800))
        H = rwa_hamiltonian(amps, N)
        U = scipy.linalg.expm(-1j * PHASE_PER_MHZ_NS * H * T)
        expected = abs(U[N, 0]) ** 2
        assert rwa_transfer_fidelity(amps, N, T) == pytest.approx(expected, abs=1e-12)


def test_analytic_transfer_pulse_construction():
    pulse = analytic_transfer_pulse(RESONANT, 4, omega0=1.0)
    assert pulse.duration == pytest.approx(500.0)
    assert pulse.channel is DriveOperator.QUBIT_TRANSVERSE
    assert [t.carrier for t in pulse.tones] == pytest.approx(
        zigzag_frequencies(RESONANT, 4)
    )
    assert pulse.constant_amps == pytest.approx(cook_shore_amplitudes(4, 1.0))
    assert all(t.n_harmonics == 0 for t in pulse.tones)


def test_pulse_json_round_trip_bit_exact(tmp_path):
    pulse = Pulse(
        DriveOperator.QUBIT_TRANSVERSE,
        duration=50.0,
        tones=(
            Tone(6180.0, (1.0 / 3.0, -2.2e-7), (math.pi, 0.1)),
            Tone(5565.441558772844, (0.7071067811865476, 12.25), (-1e-17, 3.0)),
        ),
    )
    path = tmp_path / "pulse.json"
    save_pulse(pulse, path)
    loaded = load_pulse(path)
    assert loaded == pulse  # dataclass equality is exact float equality
    # and the serialized text itself is stable
    save_pulse(loaded, tmp_path / "pulse2.json")
    assert (tmp_path / "pulse2.json").read_bytes() == path.read_bytes()


def test_pulse_dict_rejects_malformed():
    doc = pulse_to_dict(analytic_transfer_pulse(RESONANT, 2, 1.0))
    assert "constant_amps_mhz" in doc
    assert pulse_from_dict(json.loads(json.dumps(doc))) is not None
    with pytest.raises(ValueError):
        pulse_from_dict({"channel": "qubit_transverse"})
