"""Time-domain simulation in the labelled dressed basis.

States live over the canonical dressed order (ground, 1-, 1+, 2-, 2+,
...); energies enter as exact phase factors and one or more drive
channels as time-dependent couplings.  All counter-rotating and
cross-coupling terms of the drive operators are retained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from jcpulse import integrator
from jcpulse.pulses import Pulse, cook_shore_amplitudes
from jcpulse.system import (
    PHASE_PER_MHZ_NS,
    DressedLabel,
    SystemParams,
    dressed_basis_labels,
    dressed_eigensystem,
    dressed_index,
    drive_matrix_elements,
)


@dataclass(frozen=True)
class SimulationConfig:
    """Integration knobs.

    dt is the fixed step in ns (the default resolves the fastest
    carrier-plus-splitting beat by a wide margin); sample_stride is the
    trajectory sampling interval in ns, <= 0 keeps only the final state;
    norm_tolerance aborts the run if the final norm drifts further.
    """

    dt: float = 2.0e-4
    sample_stride: float = 0.05
    norm_tolerance: float = 1.0e-6

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")


@dataclass(frozen=True)
class StateVector:
    """Amplitudes over the labelled dressed basis."""

    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        object.__setattr__(self, "amplitudes", amps)
        if amps.ndim != 1:
            raise ValueError("state amplitudes must be one-dimensional")

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def population(self, label: DressedLabel) -> float:
        n_max = (self.dim - 1) // 2
        return float(abs(self.amplitudes[dressed_index(label, n_max)]) ** 2)


def basis_state(params: SystemParams, label: DressedLabel) -> StateVector:
    """Dressed basis state as a StateVector."""
    amps = np.zeros(params.dressed_dim, dtype=np.complex128)
    amps[dressed_index(label, params.n_max)] = 1.0
    return StateVector(amps)


@dataclass(frozen=True)
class Trajectory:
    """Sampled evolution: times (ns) and dressed-basis amplitudes."""

    times: np.ndarray
    amplitudes: np.ndarray
    labels: tuple[DressedLabel, ...]

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def final(self) -> StateVector:
        return StateVector(self.amplitudes[-1])


def _as_pulse_list(pulses) -> list[Pulse]:
    if isinstance(pulses, Pulse):
        return [pulses]
    out = list(pulses)
    if not out:
        raise ValueError("need at least one pulse")
    return out


def propagate(
    params: SystemParams,
    pulses,
    psi0: StateVector,
    T: float | None = None,
    config: SimulationConfig | None = None,
) -> Trajectory:
    """Integrate the driven system for the common pulse duration.

    pulses may be a single Pulse or a list sharing one duration; pulses
    on the same channel add coherently.  psi0 must be normalized over
    the labelled dressed basis of params.
    """
    config = config or SimulationConfig()
    pulses = _as_pulse_list(pulses)

    durations = {p.duration for p in pulses}
    if len(durations) != 1:
        raise ValueError(f"pulses must share one duration, got {sorted(durations)}")
    duration = durations.pop()
    if T is not None and not math.isclose(T, duration, rel_tol=0, abs_tol=1e-9):
        raise ValueError(f"requested T={T} ns but pulses last {duration} ns")

    if psi0.dim != params.dressed_dim:
        raise ValueError(
            f"state dimension {psi0.dim} does not match the truncation "
            f"(expected {params.dressed_dim})"
        )
    if abs(psi0.norm - 1.0) > 1e-10:
        raise ValueError(f"initial state must be normalized, norm={psi0.norm}")

    energies = np.array([s.energy for s in dressed_eigensystem(params)])

    channels: list = []
    rows: list[list] = []
    for pulse in pulses:
        if pulse.channel not in channels:
            channels.append(pulse.channel)
            rows.append([])
        c = channels.index(pulse.channel)
        const = pulse.constant_amps or (0.0,) * len(pulse.tones)
        for tone, c0 in zip(pulse.tones, const):
            rows[c].append((tone.carrier, tone.a_coeffs, tone.b_coeffs, c0))
    mats = np.stack(
        [PHASE_PER_MHZ_NS * drive_matrix_elements(params, ch) for ch in channels]
    )

    times, states = integrator.integrate(
        energies, mats, integrator.pack_tones(rows),
        duration, config.dt, config.sample_stride, psi0.amplitudes,
    )

    drift = abs(np.linalg.norm(states[-1]) - 1.0)
    # not() keeps the guard live when the step blew up to nan/inf
    if not drift <= config.norm_tolerance:
        raise RuntimeError(
            f"norm drifted by {drift:.3e} (> {config.norm_tolerance:.1e}); "
            f"reduce dt below {config.dt} ns"
        )
    return Trajectory(
        times=times,
        amplitudes=states,
        labels=tuple(dressed_basis_labels(params.n_max)),
    )


def fidelity(state: StateVector, target: StateVector) -> float:
    """|<target|state>|^2."""
    if state.dim != target.dim:
        raise ValueError("states live in different truncations")
    return float(abs(np.vdot(target.amplitudes, state.amplitudes)) ** 2)


def decoherence_fidelity(T: float, N: int, t_qubit: float, t_resonator: float) -> float:
    """Coarse open-system bound exp(-T/Tq) exp(-N T / (2 Tr)).

    The transfer spends roughly half its time with the qubit excited and
    climbs to photon number N, hence the two exponents; T, Tq, Tr in ns.
    """
    if T <= 0 or t_qubit <= 0 or t_resonator <= 0:
        raise ValueError("times must be positive")
    if N < 1:
        raise ValueError("target level must be at least 1")
    return math.exp(-T / t_qubit) * math.exp(-N * T / (2.0 * t_resonator))


@dataclass(frozen=True)
class TransferTimeBounds:
    """Durations (ns) needed at a common amplitude ceiling omega_max."""

    t_multi: float
    t_single: float

    @property
    def ratio(self) -> float:
        return self.t_multi / self.t_single


def transfer_time_bounds(N: int, omega_max: float) -> TransferTimeBounds:
    """Sequential versus simultaneous transfer times at amplitude cap.

    Sequential rungs run one after another: T_multi =
    (sqrt(2) + 2 (N - 1)) pi / Omega_max.  The simultaneous ladder is
    limited by its largest tone: T_single = max_n(Omega_n / Omega_0)
    pi / Omega_max.  Both with Omega_max = 2 pi 1e-3 omega_max rad/ns.
    """
    if N < 1:
        raise ValueError("target level must be at least 1")
    if omega_max <= 0:
        raise ValueError("omega_max must be positive")
    omega_angular = PHASE_PER_MHZ_NS * omega_max
    t_multi = (math.sqrt(2.0) + 2.0 * (N - 1)) * math.pi / omega_angular
    t_single = max(cook_shore_amplitudes(N, 1.0)) * math.pi / omega_angular
    return TransferTimeBounds(t_multi=t_multi, t_single=t_single)


@dataclass(frozen=True)
class ConvergenceReport:
    """Fidelity at the working truncation and at a widened one."""

    fidelity: float
    fidelity_refined: float
    margin: int

    @property
    def delta(self) -> float:
        return abs(self.fidelity - self.fidelity_refined)

    def converged(self, tol: float = 1e-6) -> bool:
        return self.delta <= tol


def embed_state(state: StateVector, n_max_from: int, n_max_to: int) -> StateVector:
    """Embed a dressed-basis state into a wider truncation.

    Dressed states of doublet n do not depend on the truncation, so the
    canonical order embeds as a prefix.
    """
    if n_max_to < n_max_from:
        raise ValueError("target truncation is narrower than the source")
    amps = np.zeros(2 * n_max_to + 1, dtype=np.complex128)
    amps[: 2 * n_max_from + 1] = state.amplitudes
    return StateVector(amps)


def convergence_check(
    params: SystemParams,
    pulses,
    psi0: StateVector,
    target: StateVector,
    config: SimulationConfig | None = None,
    margin: int = 2,
) -> ConvergenceReport:
    """Re-run a transfer with n_max widened by margin and compare fidelities."""
    if margin < 1:
        raise ValueError("margin must be at least 1")
    config = config or SimulationConfig()
    fast = replace(config, sample_stride=0.0)
    f_base = fidelity(propagate(params, pulses, psi0, config=fast).final, target)
    wide = replace(params, n_max=params.n_max + margin)
    f_wide = fidelity(
        propagate(
            wide,
            pulses,
            embed_state(psi0, params.n_max, wide.n_max),
            config=fast,
        ).final,
        embed_state(target, params.n_max, wide.n_max),
    )
    return ConvergenceReport(fidelity=f_base, fidelity_refined=f_wide, margin=margin)


def export_trajectory_csv(traj: Trajectory, path, ladder=None) -> None:
    """Write t_ns plus per-label populations as CSV (LF line endings).

    Columns follow the given ladder order first (e.g. the transfer
    ladder), then the remaining dressed labels in canonical order.
    """
    order: list[DressedLabel] = []
    for lab in list(ladder or []) + list(traj.labels):
        if lab not in order:
            if lab not in traj.labels:
                raise ValueError(f"label {lab} not present in the trajectory")
            order.append(lab)
    columns = [traj.labels.index(lab) for lab in order]
    pops = traj.populations
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t_ns," + ",".join(f"p_{lab}" for lab in order) + "\n")
        for i, t in enumerate(traj.times):
            row = [repr(float(t))] + [repr(float(pops[i, j])) for j in columns]
            fh.write(",".join(row) + "\n")
