"""Derivative-free pulse optimization.

Multi-start Nelder-Mead over drive-tone parameters (one carrier plus M
cosine and M sine harmonic coefficients per tone), minimizing the
simulated infidelity of a dressed-ladder transfer. Restart 0 starts
from the closed-form equal-area seed; the rest start from seeded random
perturbations of it. The search runs on a coarse time step and the
winning pulse is re-scored on the fine verification step, so the
reported infidelity is always an honest full-resolution number.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .dynamics import (
    SimulationConfig,
    basis_state,
    convergence_check,
    fidelity,
    propagate,
)
from .pulses import Pulse, Tone, ladder_basis, pulse_from_dict, pulse_to_dict
from .system import (
    DressedLabel,
    DriveOperator,
    SystemParams,
    dressed_eigensystem,
    dressed_index,
    drive_matrix_elements,
)

__all__ = [
    "OptimizationProblem",
    "OptimizerOptions",
    "OptimizationResult",
    "RestartRecord",
    "nelder_mead",
    "seed_from_analytic",
    "optimize_fock_pulse",
    "save_optimization",
    "load_optimization",
]


@dataclass(frozen=True)
class OptimizationProblem:
    """A ladder-transfer target for the pulse search.

    The transfer climbs `ladder` (defaults to the alternating-branch
    ladder from the ground state to |N,->), one drive tone per rung
    pair, so the parameter vector has length (len(ladder)-1)*(1+2M).
    """

    params: SystemParams
    N: int
    T: float
    M: int
    channel: DriveOperator = DriveOperator.QUBIT_TRANSVERSE
    initial_state: DressedLabel = DressedLabel.ground()
    target_state: Optional[DressedLabel] = None
    ladder: Optional[tuple[DressedLabel, ...]] = None

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.N > self.params.n_max:
            raise ValueError(f"N={self.N} exceeds truncation n_max={self.params.n_max}")
        if self.T <= 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.M < 1:
            raise ValueError(f"M must be >= 1, got {self.M}")
        if self.target_state is None:
            object.__setattr__(self, "target_state", DressedLabel.minus(self.N))
        if self.ladder is None:
            if self.initial_state != DressedLabel.ground():
                raise ValueError(
                    "an explicit ladder is required when the initial state "
                    "is not the ground state"
                )
            if self.target_state != DressedLabel.minus(self.N):
                raise ValueError(
                    "an explicit ladder is required for non-default targets"
                )
            object.__setattr__(self, "ladder", ladder_basis(self.N))
        object.__setattr__(self, "ladder", tuple(self.ladder))
        lad = self.ladder
        if len(lad) < 2:
            raise ValueError("ladder needs at least two levels")
        if lad[0] != self.initial_state or lad[-1] != self.target_state:
            raise ValueError("ladder endpoints must match initial and target states")
        for lab in lad:
            if lab.n > self.params.n_max:
                raise ValueError(f"ladder level {lab} exceeds truncation")

    @property
    def n_tones(self) -> int:
        return len(self.ladder) - 1

    @property
    def n_parameters(self) -> int:
        return self.n_tones * (1 + 2 * self.M)


@dataclass(frozen=True)
class OptimizerOptions:
    """Search knobs.

    frequency_prior_halfwidth and coeff_prior set both the initial
    simplex spread and the restart perturbation range, in MHz.
    search_dt is the coarse integration step used inside the search;
    verify_dt is the fine step used to score the returned pulse.

    A bare simplex run degenerates long before deep optima in higher
    dimension, so each restart may append polish_passes extra simplex
    runs, re-initialized at the incumbent with the prior widths scaled
    by polish_shrink (fixed, not compounding). stop_objective > 0 ends
    a restart early once the search objective falls below it.
    """

    max_iterations: int = 5000
    restarts: int = 8
    seed: int = 0
    xtol: float = 1.0e-6
    ftol: float = 1.0e-12
    frequency_prior_halfwidth: float = 50.0
    coeff_prior: float = 20.0
    search_dt: float = 1.0e-3
    verify_dt: float = 2.0e-4
    polish_passes: int = 0
    polish_shrink: float = 0.02
    stop_objective: float = 0.0

    def __post_init__(self) -> None:
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")
        if self.xtol <= 0 or self.ftol <= 0:
            raise ValueError("tolerances must be positive")
        if self.frequency_prior_halfwidth <= 0 or self.coeff_prior <= 0:
            raise ValueError("prior widths must be positive")
        if self.search_dt <= 0 or self.verify_dt <= 0:
            raise ValueError("time steps must be positive")
        if self.polish_passes < 0:
            raise ValueError("polish_passes must be >= 0")
        if not 0.0 < self.polish_shrink < 1.0:
            raise ValueError("polish_shrink must be in (0, 1)")
        if self.stop_objective < 0.0:
            raise ValueError("stop_objective must be >= 0")


@dataclass(frozen=True)
class RestartRecord:
    """Outcome of one simplex restart (objective at the search step).

    An aborted restart (non-finite objective at some probe) carries the
    diagnostic message, an infinite objective, and no parameter vector.
    """

    index: int
    objective: float
    iterations: int
    x: tuple[float, ...]
    # sparse convergence trace: (iteration, best objective) at each improvement
    trace: tuple[tuple[int, float], ...]
    diagnostic: Optional[str] = None

    @property
    def aborted(self) -> bool:
        return self.diagnostic is not None


@dataclass(frozen=True)
class OptimizationResult:
    best_pulse: Pulse
    infidelity: float
    iterations: int
    restart_index: int
    objective_history: tuple[tuple[int, float], ...]
    per_restart: tuple[RestartRecord, ...]
    truncation_delta: float

    @property
    def truncation_converged(self) -> bool:
        return abs(self.truncation_delta) <= 1.0e-6


def nelder_mead(
    objective: Callable[[np.ndarray], float],
    x0: Sequence[float],
    options: OptimizerOptions,
    step: Optional[Sequence[float]] = None,
    callback: Optional[Callable[[int, float], None]] = None,
) -> tuple[np.ndarray, float, int]:
    """Simplex minimization; returns (x_best, f_best, iterations).

    Standard moves with reflection 1, expansion 2, contraction 0.5,
    shrink 0.5. Stops when the simplex diameter falls below xtol and
    the objective spread below ftol, or at max_iterations. The start
    point is a simplex vertex, so f_best never exceeds f(x0).
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim != 1 or x0.size == 0:
        raise ValueError("x0 must be a nonempty 1-D vector")
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be finite")

    def probe(x: np.ndarray) -> float:
        f = float(objective(x))
        if not math.isfinite(f):
            raise RuntimeError(
                f"objective returned non-finite value {f!r} at x={x.tolist()!r}"
            )
        return f

    f0 = probe(x0)
    if options.max_iterations == 0:
        return x0.copy(), f0, 0

    n = x0.size
    if step is None:
        step = np.where(x0 != 0.0, 0.05 * np.abs(x0), 0.00025)
    else:
        step = np.asarray(step, dtype=float)
        if step.shape != x0.shape or not np.all(step > 0):
            raise ValueError("step must be positive and match x0 in shape")

    simplex = np.empty((n + 1, n))
    fvals = np.empty(n + 1)
    simplex[0] = x0
    fvals[0] = f0
    for i in range(n):
        v = x0.copy()
        v[i] += step[i]
        simplex[i + 1] = v
        fvals[i + 1] = probe(v)

    iterations = 0
    while iterations < options.max_iterations:
        order = np.argsort(fvals, kind="stable")
        simplex = simplex[order]
        fvals = fvals[order]
        if (
            np.max(np.abs(fvals[1:] - fvals[0])) <= options.ftol
            and np.max(np.abs(simplex[1:] - simplex[0])) <= options.xtol
        ):
            break

        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + (centroid - simplex[-1])
        fr = probe(xr)
        if fr < fvals[0]:
            xe = centroid + 2.0 * (centroid - simplex[-1])
            fe = probe(xe)
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
        elif fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
        else:
            if fr < fvals[-1]:
                xc = centroid + 0.5 * (centroid - simplex[-1])
                fc = probe(xc)
                accept = fc <= fr
            else:
                xc = centroid - 0.5 * (centroid - simplex[-1])
                fc = probe(xc)
                accept = fc < fvals[-1]
            if accept:
                simplex[-1], fvals[-1] = xc, fc
            else:
                for i in range(1, n + 1):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    fvals[i] = probe(simplex[i])
        iterations += 1
        if callback is not None:
            callback(iterations, float(np.min(fvals)))

    best = int(np.argmin(fvals))
    return simplex[best].copy(), float(fvals[best]), iterations


def _pack(pulse_tones: Sequence[Tone], M: int) -> np.ndarray:
    x = []
    for tone in pulse_tones:
        x.append(tone.carrier)
        x.extend(tone.a_coeffs)
        x.extend(tone.b_coeffs)
    return np.asarray(x, dtype=float)


def _unpack(x: np.ndarray, n_tones: int, M: int) -> tuple[Tone, ...]:
    width = 1 + 2 * M
    tones = []
    for i in range(n_tones):
        chunk = x[i * width : (i + 1) * width]
        tones.append(
            Tone(
                carrier=float(chunk[0]),
                a_coeffs=tuple(float(c) for c in chunk[1 : 1 + M]),
                b_coeffs=tuple(float(c) for c in chunk[1 + M :]),
            )
        )
    return tuple(tones)


def _ladder_elements(problem: OptimizationProblem) -> tuple[np.ndarray, np.ndarray]:
    """Transition carriers and drive matrix elements along the ladder."""
    states = dressed_eigensystem(problem.params)
    energies = {str(s.label): s.energy for s in states}
    mat = drive_matrix_elements(problem.params, problem.channel)
    n_max = problem.params.n_max
    carriers = []
    elements = []
    for lo, hi in zip(problem.ladder[:-1], problem.ladder[1:]):
        carriers.append(abs(energies[str(hi)] - energies[str(lo)]))
        elem = mat[dressed_index(hi, n_max), dressed_index(lo, n_max)]
        if abs(elem) < 1e-12:
            raise ValueError(
                f"drive {problem.channel.value} does not couple {lo} to {hi}"
            )
        elements.append(elem)
    return np.asarray(carriers), np.asarray(elements)


def seed_from_analytic(problem: OptimizationProblem) -> np.ndarray:
    """Equal-area starting vector for the simplex search.

    Carriers sit on the bare transition frequencies. Each tone's first
    cosine coefficient is set so the time-averaged envelope reproduces
    the constant-amplitude pi-transfer in time T (the raised-cosine
    window has unit mean), giving bond strengths proportional to
    sqrt(k(L+1-k)) along the L-rung ladder. All other coefficients
    start at zero.
    """
    carriers, elements = _ladder_elements(problem)
    L = problem.n_tones
    omega0 = 1.0 / (2.0e-3 * problem.T)
    x = []
    for k in range(1, L + 1):
        amp = omega0 * math.sqrt(k * (L + 1 - k)) / abs(elements[k - 1])
        x.append(carriers[k - 1])
        x.extend([amp] + [0.0] * (problem.M - 1))
        x.extend([0.0] * problem.M)
    return np.asarray(x, dtype=float)


def _prior_widths(problem: OptimizationProblem, options: OptimizerOptions) -> np.ndarray:
    width = 1 + 2 * problem.M
    w = np.empty(problem.n_parameters)
    for i in range(problem.n_tones):
        w[i * width] = options.frequency_prior_halfwidth
        w[i * width + 1 : (i + 1) * width] = options.coeff_prior
    return w


def _make_objective(
    problem: OptimizationProblem, dt: float
) -> Callable[[np.ndarray], float]:
    config = SimulationConfig(dt=dt, sample_stride=0.0)
    psi0 = basis_state(problem.params, problem.initial_state)
    target = basis_state(problem.params, problem.target_state)

    def objective(x: np.ndarray) -> float:
        try:
            pulse = Pulse(
                problem.channel, problem.T, _unpack(x, problem.n_tones, problem.M)
            )
            traj = propagate(problem.params, pulse, psi0, config=config)
        except (ValueError, RuntimeError) as exc:
            # invalid tone parameters or a blown-up step: poison the probe
            raise RuntimeError(f"objective failed at x={x.tolist()!r}: {exc}") from exc
        return max(0.0, 1.0 - fidelity(traj.final, target))

    return objective


def optimize_fock_pulse(
    problem: OptimizationProblem,
    options: OptimizerOptions,
    checkpoint_path: Optional[str] = None,
    resume: bool = False,
) -> OptimizationResult:
    """Multi-start search for a high-fidelity ladder-transfer pulse.

    Restarts are independent; the winner is the lowest search-step
    objective (ties to the lower restart index). The reported
    infidelity re-scores the winning pulse at verify_dt. If a
    checkpoint path is given the per-restart state is rewritten after
    every restart, and resume=True skips restarts already on disk.
    """
    seed_x = seed_from_analytic(problem)
    widths = _prior_widths(problem, options)
    objective = _make_objective(problem, options.search_dt)

    done: dict[int, RestartRecord] = {}
    if resume and checkpoint_path and os.path.exists(checkpoint_path):
        prev_problem, prev_options, prev_records = _load_checkpoint(checkpoint_path)
        if prev_problem != problem or prev_options != options:
            raise ValueError(
                f"checkpoint {checkpoint_path} was written for a different "
                "problem or options; refusing to resume"
            )
        done = {r.index: r for r in prev_records}

    records: list[RestartRecord] = []
    for r in range(options.restarts):
        if r in done:
            records.append(done[r])
            continue
        if r == 0:
            x_start = seed_x
        else:
            rng = np.random.default_rng([options.seed, r])
            x_start = seed_x + rng.uniform(-widths, widths)
        trace: list[tuple[int, float]] = []
        best_seen = math.inf
        offset = 0

        def on_iteration(it: int, f_best: float) -> None:
            nonlocal best_seen
            if f_best < best_seen:
                best_seen = f_best
                trace.append((offset + it, f_best))

        try:
            x_best, f_best, iterations = nelder_mead(
                objective, x_start, options, step=widths, callback=on_iteration
            )
            for _ in range(options.polish_passes):
                if options.stop_objective > 0 and f_best <= options.stop_objective:
                    break
                offset = iterations
                x_pass, f_pass, it_pass = nelder_mead(
                    objective,
                    x_best,
                    options,
                    step=widths * options.polish_shrink,
                    callback=on_iteration,
                )
                iterations += it_pass
                if f_pass >= f_best:
                    # Deterministic: an identical pass would repeat exactly.
                    break
                x_best, f_best = x_pass, f_pass
        except RuntimeError as exc:
            records.append(
                RestartRecord(
                    index=r,
                    objective=math.inf,
                    iterations=0,
                    x=(),
                    trace=(),
                    diagnostic=str(exc),
                )
            )
            if checkpoint_path:
                _save_checkpoint(checkpoint_path, problem, options, records)
            continue
        if not trace or trace[-1][1] > f_best:
            trace.append((iterations, f_best))
        records.append(
            RestartRecord(
                index=r,
                objective=f_best,
                iterations=iterations,
                x=tuple(float(v) for v in x_best),
                trace=tuple(trace),
            )
        )
        if checkpoint_path:
            _save_checkpoint(checkpoint_path, problem, options, records)

    alive = [rec for rec in records if not rec.aborted]
    if not alive:
        details = "; ".join(r.diagnostic or "" for r in records)
        raise RuntimeError(f"every restart aborted: {details}")
    winner = min(alive, key=lambda rec: (rec.objective, rec.index))
    best_pulse = Pulse(
        problem.channel,
        problem.T,
        _unpack(np.asarray(winner.x), problem.n_tones, problem.M),
    )

    verify_config = SimulationConfig(dt=options.verify_dt, sample_stride=0.0)
    psi0 = basis_state(problem.params, problem.initial_state)
    target = basis_state(problem.params, problem.target_state)
    traj = propagate(problem.params, best_pulse, psi0, config=verify_config)
    infidelity = max(0.0, 1.0 - fidelity(traj.final, target))

    report = convergence_check(
        problem.params, best_pulse, psi0, target, config=verify_config
    )

    return OptimizationResult(
        best_pulse=best_pulse,
        infidelity=infidelity,
        iterations=winner.iterations,
        restart_index=winner.index,
        objective_history=winner.trace,
        per_restart=tuple(records),
        truncation_delta=report.delta,
    )


def _problem_to_dict(problem: OptimizationProblem) -> dict:
    return {
        "params": {
            "omega_r": problem.params.omega_r,
            "delta": problem.params.delta,
            "g": problem.params.g,
            "n_max": problem.params.n_max,
        },
        "N": problem.N,
        "T": problem.T,
        "M": problem.M,
        "channel": problem.channel.value,
        "initial_state": str(problem.initial_state),
        "target_state": str(problem.target_state),
        "ladder": [str(lab) for lab in problem.ladder],
    }


def _problem_from_dict(doc: dict) -> OptimizationProblem:
    p = doc["params"]
    return OptimizationProblem(
        params=SystemParams(p["omega_r"], p["delta"], p["g"], p["n_max"]),
        N=doc["N"],
        T=doc["T"],
        M=doc["M"],
        channel=DriveOperator(doc["channel"]),
        initial_state=DressedLabel.parse(doc["initial_state"]),
        target_state=DressedLabel.parse(doc["target_state"]),
        ladder=tuple(DressedLabel.parse(s) for s in doc["ladder"]),
    )


def _options_to_dict(options: OptimizerOptions) -> dict:
    return {
        "max_iterations": options.max_iterations,
        "restarts": options.restarts,
        "seed": options.seed,
        "xtol": options.xtol,
        "ftol": options.ftol,
        "frequency_prior_halfwidth": options.frequency_prior_halfwidth,
        "coeff_prior": options.coeff_prior,
        "search_dt": options.search_dt,
        "verify_dt": options.verify_dt,
        "polish_passes": options.polish_passes,
        "polish_shrink": options.polish_shrink,
        "stop_objective": options.stop_objective,
    }


def _record_to_dict(rec: RestartRecord) -> dict:
    return {
        "index": rec.index,
        "objective": rec.objective if math.isfinite(rec.objective) else None,
        "iterations": rec.iterations,
        "x": list(rec.x),
        "trace": [[it, f] for it, f in rec.trace],
        "diagnostic": rec.diagnostic,
    }


def _record_from_dict(doc: dict) -> RestartRecord:
    objective = doc["objective"]
    return RestartRecord(
        index=doc["index"],
        objective=math.inf if objective is None else float(objective),
        iterations=doc["iterations"],
        x=tuple(doc["x"]),
        trace=tuple((int(it), float(f)) for it, f in doc["trace"]),
        diagnostic=doc.get("diagnostic"),
    )


def _save_checkpoint(path, problem, options, records) -> None:
    doc = {
        "problem": _problem_to_dict(problem),
        "options": _options_to_dict(options),
        "per_restart": [_record_to_dict(r) for r in records],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_checkpoint(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    problem = _problem_from_dict(doc["problem"])
    options = OptimizerOptions(**doc["options"])
    records = [_record_from_dict(r) for r in doc["per_restart"]]
    return problem, options, records


def save_optimization(
    path: str,
    problem: OptimizationProblem,
    options: OptimizerOptions,
    result: OptimizationResult,
) -> None:
    """Write the full optimization record as deterministic JSON."""
    doc = {
        "problem": _problem_to_dict(problem),
        "options": _options_to_dict(options),
        "best_pulse": pulse_to_dict(result.best_pulse),
        "infidelity": result.infidelity,
        "iterations": result.iterations,
        "restart_index": result.restart_index,
        "objective_history": [[it, f] for it, f in result.objective_history],
        "truncation_delta": result.truncation_delta,
        "truncation_converged": result.truncation_converged,
        "per_restart": [_record_to_dict(r) for r in result.per_restart],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_optimization(
    path: str,
) -> tuple[OptimizationProblem, OptimizerOptions, OptimizationResult]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    problem = _problem_from_dict(doc["problem"])
    options = OptimizerOptions(**doc["options"])
    result = OptimizationResult(
        best_pulse=pulse_from_dict(doc["best_pulse"]),
        infidelity=doc["infidelity"],
        iterations=doc["iterations"],
        restart_index=doc["restart_index"],
        objective_history=tuple((int(it), float(f)) for it, f in doc["objective_history"]),
        per_restart=tuple(_record_from_dict(r) for r in doc["per_restart"]),
        truncation_delta=doc["truncation_delta"],
    )
    return problem, options, result
