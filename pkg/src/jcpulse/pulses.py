"""Multi-tone drive synthesis for ladder transfers.

A drive on one physical channel is a sum of tones,

    f(t) = sum_n [ A_n(t) cos(2 pi w_n t) + B_n(t) sin(2 pi w_n t) ],

with carriers w_n in MHz and windowed envelopes

    A_n(t) = c_n + sum_k a_n^(k) (1 - cos(2 pi k t / T)),
    B_n(t) =       sum_k b_n^(k) sin(2 pi k t / T),

so that for c_n = 0 the envelopes vanish at t = 0 and t = T.  Constant
amplitudes c_n describe the analytic transfer pulses; the Fourier
coefficients are the optimizer's degrees of freedom.

The analytic construction drives the zig-zag ladder |0>, |1, s1>,
|2, s2>, ..., |N, ->, alternating between the dressed branches, with one
resonant tone per rung.  Amplitudes scaled as in a spin-N/2 ladder make
the rotating-frame Hamiltonian proportional to J_x, which transfers
|0> -> |N, -> perfectly in a half period.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from jcpulse.system import (
    PHASE_PER_MHZ_NS,
    DressedLabel,
    DriveOperator,
    SystemParams,
    dressed_eigensystem,
)


@dataclass(frozen=True)
class Tone:
    """One carrier with its envelope Fourier coefficients (all MHz)."""

    carrier: float
    a_coeffs: tuple[float, ...] = ()
    b_coeffs: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "a_coeffs", tuple(float(x) for x in self.a_coeffs))
        object.__setattr__(self, "b_coeffs", tuple(float(x) for x in self.b_coeffs))
        if self.carrier <= 0:
            raise ValueError(f"carrier must be positive, got {self.carrier}")
        if len(self.a_coeffs) != len(self.b_coeffs):
            raise ValueError("a_coeffs and b_coeffs must have equal length")

    @property
    def n_harmonics(self) -> int:
        return len(self.a_coeffs)


@dataclass(frozen=True)
class Pulse:
    """A multi-tone drive on one channel for a fixed duration (ns)."""

    channel: DriveOperator
    duration: float
    tones: tuple[Tone, ...]
    constant_amps: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "tones", tuple(self.tones))
        if self.constant_amps is not None:
            object.__setattr__(
                self, "constant_amps", tuple(float(x) for x in self.constant_amps)
            )
        if self.duration <= 0:
            raise ValueError(f"duration must be positive, got {self.duration}")
        if not self.tones:
            raise ValueError("a pulse needs at least one tone")
        if self.constant_amps is not None and len(self.constant_amps) != len(self.tones):
            raise ValueError("constant_amps must match the tone count")


def evaluate_drive(pulse: Pulse, t):
    """Drive waveform f(t) in MHz at time(s) t in [0, duration] (ns)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0) or np.any(t_arr > pulse.duration):
        raise ValueError("drive evaluated outside [0, duration]")
    window = 2.0 * math.pi * t_arr / pulse.duration
    total = np.zeros_like(t_arr)
    for i, tone in enumerate(pulse.tones):
        amp_a = np.zeros_like(t_arr)
        if pulse.constant_amps is not None:
            amp_a += pulse.constant_amps[i]
        amp_b = np.zeros_like(t_arr)
        for k in range(1, tone.n_harmonics + 1):
            amp_a += tone.a_coeffs[k - 1] * (1.0 - np.cos(k * window))
            amp_b += tone.b_coeffs[k - 1] * np.sin(k * window)
        phase = PHASE_PER_MHZ_NS * tone.carrier * t_arr
        total += amp_a * np.cos(phase) + amp_b * np.sin(phase)
    return total if total.ndim else float(total)


def cook_shore_amplitudes(N: int, omega0: float) -> list[float]:
    """Tone amplitudes (MHz) of the ideal N-rung transfer ladder.

    Omega_1 = sqrt(2 N) Omega_0 for the first rung (whose dressed matrix
    element is 1/sqrt(2)) and Omega_n = 2 sqrt(n (N + 1 - n)) Omega_0 for
    the remaining rungs (element 1/2); every amplitude stays below
    (N + 1) Omega_0.
    """
    if N < 1:
        raise ValueError("transfer target must be at least 1")
    if omega0 <= 0:
        raise ValueError("omega0 must be positive")
    amps = [math.sqrt(2.0 * N) * omega0]
    for n in range(2, N + 1):
        amps.append(2.0 * math.sqrt(n * (N + 1 - n)) * omega0)
    return amps


def ladder_basis(N: int) -> list[DressedLabel]:
    """Zig-zag ladder states from the ground state up to |N, ->.

    Rung k carries the branch that alternates so the top is always "-":
    for odd N the ladder is |0>, |1,->, |2,+>, ..., for even N it is
    |0>, |1,+>, |2,->, ...
    """
    if N < 1:
        raise ValueError("transfer target must be at least 1")
    labels = [DressedLabel.ground()]
    for k in range(1, N + 1):
        branch = "-" if (k % 2) == (N % 2) else "+"
        labels.append(DressedLabel(k, branch))
    return labels


def zigzag_frequencies(params: SystemParams, N: int) -> list[float]:
    """Resonant carriers (MHz) for the N rungs of the zig-zag ladder.

    Carrier k is the absolute energy difference of consecutive ladder
    states, so the tones alternate between the cross-branch families and
    stay spectrally separated from each other.
    """
    if not 1 <= N <= params.n_max:
        raise ValueError(f"need 1 <= N <= n_max, got N={N}, n_max={params.n_max}")
    energies = {str(s.label): s.energy for s in dressed_eigensystem(params)}
    ladder = ladder_basis(N)
    return [
        abs(energies[str(ladder[k])] - energies[str(ladder[k - 1])])
        for k in range(1, N + 1)
    ]


def rwa_hamiltonian(amplitudes, N: int) -> np.ndarray:
    """Rotating-frame ladder Hamiltonian (MHz) for given tone amplitudes.

    Tridiagonal over the N + 1 ladder states with zero diagonal (every
    tone resonant) and bonds (sqrt(2)/4) Omega_1, then Omega_n / 4.
    """
    amplitudes = list(amplitudes)
    if len(amplitudes) != N:
        raise ValueError(f"expected {N} amplitudes, got {len(amplitudes)}")
    H = np.zeros((N + 1, N + 1))
    for n in range(1, N + 1):
        elem = 1.0 / math.sqrt(2.0) if n == 1 else 0.5
        H[n - 1, n] = H[n, n - 1] = 0.5 * elem * amplitudes[n - 1]
    return H


def rwa_transfer_fidelity(amplitudes, N: int, T: float) -> float:
    """|<N| exp(-i 2 pi H_rwa T) |0>|^2 for the rotating-frame ladder."""
    H = rwa_hamiltonian(amplitudes, N)
    evals, V = np.linalg.eigh(H)
    phases = np.exp(-1j * PHASE_PER_MHZ_NS * evals * T)
    amp = (V * phases) @ V[0].conj()
    return float(abs(amp[N]) ** 2)


def analytic_transfer_pulse(
    params: SystemParams,
    N: int,
    omega0: float,
    channel: DriveOperator = DriveOperator.QUBIT_TRANSVERSE,
) -> Pulse:
    """Constant-amplitude zig-zag pulse transferring |0> -> |N, ->.

    Duration is the half period pi / Omega_0, i.e. 500 / omega0 ns for
    omega0 in MHz.
    """
    carriers = zigzag_frequencies(params, N)
    amps = cook_shore_amplitudes(N, omega0)
    duration = math.pi / (PHASE_PER_MHZ_NS * omega0)
    tones = tuple(Tone(carrier=c) for c in carriers)
    return Pulse(channel=channel, duration=duration, tones=tones,
                 constant_amps=tuple(amps))


# --- serialization ---------------------------------------------------------
#
# Schema: {"channel": ..., "duration_ns": ..., "tones": [{"carrier_mhz": ...,
# "a_mhz": [...], "b_mhz": [...]}, ...], "constant_amps_mhz": [...]?}.
# Floats survive a round trip bit-exactly (shortest-repr JSON encoding).


def pulse_to_dict(pulse: Pulse) -> dict:
    doc = {
        "channel": pulse.channel.value,
        "duration_ns": pulse.duration,
        "tones": [
            {
                "carrier_mhz": tone.carrier,
                "a_mhz": list(tone.a_coeffs),
                "b_mhz": list(tone.b_coeffs),
            }
            for tone in pulse.tones
        ],
    }
    if pulse.constant_amps is not None:
        doc["constant_amps_mhz"] = list(pulse.constant_amps)
    return doc


def pulse_from_dict(doc: dict) -> Pulse:
    try:
        tones = tuple(
            Tone(
                carrier=float(td["carrier_mhz"]),
                a_coeffs=tuple(float(x) for x in td.get("a_mhz", [])),
                b_coeffs=tuple(float(x) for x in td.get("b_mhz", [])),
            )
            for td in doc["tones"]
        )
        const = doc.get("constant_amps_mhz")
        return Pulse(
            channel=DriveOperator(doc["channel"]),
            duration=float(doc["duration_ns"]),
            tones=tones,
            constant_amps=None if const is None else tuple(float(x) for x in const),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed pulse document: {exc}") from exc


def save_pulse(pulse: Pulse, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(pulse_to_dict(pulse), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_pulse(path) -> Pulse:
    with open(path, encoding="utf-8") as fh:
        return pulse_from_dict(json.load(fh))
