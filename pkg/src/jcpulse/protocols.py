"""Protocol assembly on top of single pulses.

Three workflows share the machinery here: climbing the dressed ladder
to a number state in one multi-tone step, rotations between levels of a
qudit encoded in the lower-branch states, and synthesis of a two-mode
path-entangled superposition across a pair of independent systems.

Levels of the qudit are the ground state plus the lower-branch doublet
states. Two edge families connect them: neighboring levels driven by a
single tone on the lower-branch transition, and multi-tone transfers
that alternate branches on every intermediate rung. The alternating
family reaches odd levels from the ground state and same-parity pairs
among the excited levels, which is why a rotation such as level 0 to
level 4 needs a three-step compilation through an intermediate level.

Rotation realizations here use constant-amplitude tones at a common
base amplitude; a half-turn is exact in the rotating frame while other
angles on multi-rung edges rotate the whole embedded spin rather than
the endpoint pair alone (endpoint population transfer is exact only at
half-turns). Plan fidelities compare against the ideal real-rotation
image, so partial angles carry that caveat too.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .dynamics import (
    SimulationConfig,
    StateVector,
    Trajectory,
    propagate,
)
from .optimize import OptimizationResult
from .pulses import (
    Pulse,
    Tone,
    analytic_transfer_pulse,
    pulse_from_dict,
    pulse_to_dict,
)
from .system import (
    PHASE_PER_MHZ_NS,
    DressedLabel,
    DriveOperator,
    SystemParams,
    dressed_eigensystem,
    dressed_index,
    drive_matrix_elements,
)

__all__ = [
    "EdgeKind",
    "GraphEdge",
    "CouplingGraph",
    "RotationStep",
    "StageKind",
    "PlanStage",
    "TargetComponent",
    "ProtocolPlan",
    "PlanSimulation",
    "AnalyticSource",
    "OptimizedSource",
    "build_coupling_graph",
    "compile_rotation",
    "edge_pulse",
    "ladder_pulse",
    "rotation_plan",
    "fock_prep_plan",
    "noon_plan",
    "simulate_plan",
    "plan_to_dict",
    "plan_from_dict",
    "save_plan",
    "load_plan",
]

# Base drive amplitude (MHz) for rotation stages. The lower-branch
# neighbor transitions crowd within ~9 MHz of each other at these
# system parameters, so the default stays small to bound leakage.
DEFAULT_BASE_AMPLITUDE = 1.0


class EdgeKind(enum.Enum):
    PLUS_MINUS = "plus_minus"  # single tone between neighboring levels
    DIAGONAL = "diagonal"      # multi-tone branch-alternating transfer


@dataclass(frozen=True)
class GraphEdge:
    """Undirected coupling between qudit levels j < k."""

    j: int
    k: int
    kind: EdgeKind

    def __post_init__(self) -> None:
        if not 0 <= self.j < self.k:
            raise ValueError(f"edge needs 0 <= j < k, got ({self.j}, {self.k})")

    def touches(self, node: int) -> bool:
        return node in (self.j, self.k)

    def other(self, node: int) -> int:
        if node == self.j:
            return self.k
        if node == self.k:
            return self.j
        raise ValueError(f"node {node} is not on edge ({self.j}, {self.k})")


def node_label(n: int) -> DressedLabel:
    """Dressed state encoding qudit level n."""
    return DressedLabel.ground() if n == 0 else DressedLabel.minus(n)


@dataclass(frozen=True)
class CouplingGraph:
    """Drivable transitions among the d qudit levels."""

    params: SystemParams
    d: int
    edges: tuple[GraphEdge, ...]

    @property
    def nodes(self) -> range:
        return range(self.d)

    def edge_between(self, j: int, k: int) -> Optional[GraphEdge]:
        lo, hi = min(j, k), max(j, k)
        for edge in self.edges:
            if edge.j == lo and edge.k == hi:
                return edge
        return None

    def neighbors(self, node: int) -> list[int]:
        return sorted(edge.other(node) for edge in self.edges if edge.touches(node))


def build_coupling_graph(params: SystemParams, d: int) -> CouplingGraph:
    """Level-coupling graph for a d-level qudit.

    Neighboring levels always share a single-tone edge. The multi-tone
    alternating transfers add edges from level 0 to every odd level and
    between excited levels an even distance apart: the branch flips on
    each rung, so both endpoints land on the lower branch only under
    those parity rules.
    """
    if d < 2:
        raise ValueError(f"a qudit needs at least 2 levels, got d={d}")
    if d - 1 >= params.n_max:
        raise ValueError(
            f"d={d} needs truncation above {d - 1}, got n_max={params.n_max}"
        )
    edges = [GraphEdge(n, n + 1, EdgeKind.PLUS_MINUS) for n in range(d - 1)]
    for k in range(3, d, 2):
        edges.append(GraphEdge(0, k, EdgeKind.DIAGONAL))
    for j in range(1, d - 1):
        for k in range(j + 2, d, 2):
            edges.append(GraphEdge(j, k, EdgeKind.DIAGONAL))
    return CouplingGraph(params=params, d=d, edges=tuple(edges))


@dataclass(frozen=True)
class RotationStep:
    """One rotation by `angle` between the states of a graph edge."""

    j: int
    k: int
    angle: float
    realized_by: Pulse


def _alternating_ladder(start: DressedLabel, k: int) -> tuple[DressedLabel, ...]:
    """Branch-alternating rung sequence from `start` up to level k, lower branch.

    Each rung flips the branch; the ground state may start on either, so
    its first hop is chosen to make the parity land on the lower branch.
    """
    if k <= start.n:
        raise ValueError(f"ladder must climb: start {start}, top {k}")
    labels = [start]
    if start.is_ground:
        first = "-" if (k - 1) % 2 == 0 else "+"
        labels.append(DressedLabel(1, first))
        lo = 1
    else:
        lo = start.n
    for i in range(lo + 1, k + 1):
        prev = labels[-1].branch
        labels.append(DressedLabel(i, "+" if prev == "-" else "-"))
    if labels[-1].branch != "-":
        raise ValueError(
            f"no branch-alternating path from {start} to the lower branch at {k}"
        )
    return tuple(labels)


def _transition_data(
    params: SystemParams,
    ladder: Sequence[DressedLabel],
    channel: DriveOperator,
) -> tuple[list[float], list[float]]:
    """Carrier frequencies and drive matrix elements along a ladder."""
    states = dressed_eigensystem(params)
    energies = {str(s.label): s.energy for s in states}
    mat = drive_matrix_elements(params, channel)
    carriers: list[float] = []
    elements: list[float] = []
    for lo, hi in zip(ladder[:-1], ladder[1:]):
        carriers.append(abs(energies[str(hi)] - energies[str(lo)]))
        elem = float(
            np.real(mat[dressed_index(hi, params.n_max), dressed_index(lo, params.n_max)])
        )
        if abs(elem) < 1e-12:
            raise ValueError(f"drive {channel.value} does not couple {lo} to {hi}")
        elements.append(elem)
    return carriers, elements


def ladder_pulse(
    params: SystemParams,
    ladder: Sequence[DressedLabel],
    angle: float,
    base_amplitude: float = DEFAULT_BASE_AMPLITUDE,
    channel: DriveOperator = DriveOperator.QUBIT_TRANSVERSE,
) -> Pulse:
    """Constant-amplitude multi-tone rotation along an arbitrary ladder.

    The tone amplitudes put equal effective bond strengths (scaled by
    sqrt(i(L+1-i)) across the L rungs) behind every transition, so the
    ladder behaves as one embedded spin; duration makes the accumulated
    rotation angle equal `angle` at the given base amplitude.
    """
    if not -2.0 * math.pi < angle <= 2.0 * math.pi or angle == 0.0:
        raise ValueError(f"angle must be nonzero in (-2*pi, 2*pi], got {angle}")
    if base_amplitude <= 0:
        raise ValueError(f"base amplitude must be positive, got {base_amplitude}")
    carriers, elements = _transition_data(params, ladder, channel)
    L = len(carriers)
    duration = abs(angle) / (PHASE_PER_MHZ_NS * base_amplitude)
    sign = 1.0 if angle > 0 else -1.0
    amps = [
        sign * base_amplitude * math.sqrt(i * (L + 1 - i)) / elements[i - 1]
        for i in range(1, L + 1)
    ]
    tones = tuple(Tone(carrier=c) for c in carriers)
    return Pulse(channel=channel, duration=duration, tones=tones,
                 constant_amps=tuple(amps))


def edge_ladder(edge: GraphEdge) -> tuple[DressedLabel, ...]:
    """Dressed states a rotation on this edge climbs through."""
    if edge.kind is EdgeKind.PLUS_MINUS:
        return (node_label(edge.j), node_label(edge.k))
    return _alternating_ladder(node_label(edge.j), edge.k)


def edge_pulse(
    params: SystemParams,
    edge: GraphEdge,
    angle: float,
    base_amplitude: float = DEFAULT_BASE_AMPLITUDE,
) -> Pulse:
    """Realize a rotation on a graph edge as a transverse-drive pulse."""
    return ladder_pulse(params, edge_ladder(edge), angle, base_amplitude)


def compile_rotation(
    graph: CouplingGraph,
    j: int,
    k: int,
    theta: float,
    base_amplitude: float = DEFAULT_BASE_AMPLITUDE,
) -> list[RotationStep]:
    """Steps realizing a rotation between qudit levels j and k.

    A graph edge compiles to a single step. Otherwise the rotation is
    conjugated by half-turn swaps through an intermediate neighbor m of
    k that shares an edge with j; the first and last steps are the same
    half-turn, so the sequence never exceeds three steps. Among valid
    intermediates the compiled duration is minimized, ties going to the
    smallest m.
    """
    if j not in graph.nodes or k not in graph.nodes:
        raise ValueError(f"nodes ({j}, {k}) outside 0..{graph.d - 1}")
    if j == k:
        raise ValueError("rotation needs two distinct levels")
    if not -2.0 * math.pi < theta <= 2.0 * math.pi or theta == 0.0:
        raise ValueError(f"angle must be nonzero in (-2*pi, 2*pi], got {theta}")

    direct = graph.edge_between(j, k)
    if direct is not None:
        return [RotationStep(j, k, theta, edge_pulse(graph.params, direct, theta,
                                                     base_amplitude))]

    best: Optional[tuple[float, int, RotationStep, RotationStep]] = None
    for m in graph.neighbors(k):
        swap_edge = graph.edge_between(j, m)
        if swap_edge is None:
            continue
        rot_edge = graph.edge_between(m, k)
        swap = RotationStep(j, m, math.pi,
                            edge_pulse(graph.params, swap_edge, math.pi,
                                       base_amplitude))
        rot = RotationStep(m, k, theta,
                           edge_pulse(graph.params, rot_edge, theta,
                                      base_amplitude))
        duration = 2.0 * swap.realized_by.duration + rot.realized_by.duration
        if best is None or (duration, m) < (best[0], best[1]):
            best = (duration, m, swap, rot)
    # every non-adjacent pair has an intermediate on the constructed graph
    assert best is not None, f"no intermediate level between {j} and {k}"
    _, _, swap, rot = best
    return [swap, rot, swap]


# --- plans -----------------------------------------------------------------


class StageKind(enum.Enum):
    TRANSFER = "transfer"  # one multi-tone transfer pulse
    ROTATION = "rotation"  # compiled qudit rotation step
    PARALLEL = "parallel"  # simultaneous pulses on two systems


@dataclass(frozen=True)
class PlanStage:
    """One stage of a protocol: a pulse, plus rotation/parallel metadata."""

    kind: StageKind
    pulse: Pulse
    pulse_b: Optional[Pulse] = None
    edge: Optional[tuple[int, int]] = None
    angle: Optional[float] = None

    def __post_init__(self) -> None:
        if (self.kind is StageKind.PARALLEL) != (self.pulse_b is not None):
            raise ValueError("exactly the parallel stages carry a second pulse")
        if (self.kind is StageKind.ROTATION) != (self.edge is not None):
            raise ValueError("exactly the rotation stages carry an edge")
        if self.pulse_b is not None and not math.isclose(
            self.pulse_b.duration, self.pulse.duration
        ):
            raise ValueError("parallel stage pulses must share one duration")

    @property
    def duration(self) -> float:
        return self.pulse.duration


@dataclass(frozen=True)
class TargetComponent:
    """One basis component of a (possibly joint) superposition."""

    labels: tuple[str, ...]
    amplitude: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
        for lab in self.labels:
            DressedLabel.parse(lab)  # validates


@dataclass(frozen=True)
class ProtocolPlan:
    """Ordered stages plus the initial and target superpositions."""

    stages: tuple[PlanStage, ...]
    initial: tuple[TargetComponent, ...]
    target: tuple[TargetComponent, ...]
    n_systems: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "stages", tuple(self.stages))
        object.__setattr__(self, "initial", tuple(self.initial))
        object.__setattr__(self, "target", tuple(self.target))
        if self.n_systems not in (1, 2):
            raise ValueError("plans cover one or two systems")
        for comps in (self.initial, self.target):
            if not comps:
                raise ValueError("initial and target must be nonempty")
            for c in comps:
                if len(c.labels) != self.n_systems:
                    raise ValueError(
                        f"component {c.labels} does not match {self.n_systems} systems"
                    )
            total = sum(c.amplitude**2 for c in comps)
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"component amplitudes not normalized: {total}")
        for stage in self.stages:
            if (stage.kind is StageKind.PARALLEL) != (self.n_systems == 2):
                raise ValueError("parallel stages belong to two-system plans only")

    @property
    def duration(self) -> float:
        return sum(stage.duration for stage in self.stages)


@dataclass(frozen=True)
class AnalyticSource:
    """Closed-form constant-amplitude realization at a base amplitude (MHz)."""

    base_amplitude: float

    def __post_init__(self) -> None:
        if self.base_amplitude <= 0:
            raise ValueError("base amplitude must be positive")


@dataclass(frozen=True)
class OptimizedSource:
    """Use the winning pulse of a finished optimization run."""

    result: OptimizationResult


PulseSource = Union[AnalyticSource, OptimizedSource]


def fock_prep_plan(
    params: SystemParams, N: int, source: PulseSource
) -> ProtocolPlan:
    """Single-stage plan taking the ground state to the lower-branch level N.

    Leave a few truncation levels above N so leakage during the transfer
    is represented; N + 3 <= n_max is comfortable.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if N > params.n_max:
        raise ValueError(f"N={N} exceeds truncation n_max={params.n_max}")
    if isinstance(source, AnalyticSource):
        pulse = analytic_transfer_pulse(params, N, source.base_amplitude)
    elif isinstance(source, OptimizedSource):
        pulse = source.result.best_pulse
    else:
        raise TypeError(f"unknown pulse source: {source!r}")
    return ProtocolPlan(
        stages=(PlanStage(StageKind.TRANSFER, pulse),),
        initial=(TargetComponent(("0",), 1.0),),
        target=(TargetComponent((str(DressedLabel.minus(N)),), 1.0),),
    )


def rotation_plan(
    graph: CouplingGraph,
    steps: Sequence[RotationStep],
    start_node: Optional[int] = None,
) -> ProtocolPlan:
    """Wrap compiled rotation steps into a simulatable plan.

    The target is the image of the start level under the ideal real
    rotations (each step mixes its two levels by angle/2 in the plane),
    so a half-turn sequence targets a single level while partial angles
    target the ideal superposition.
    """
    steps = list(steps)
    if not steps:
        raise ValueError("a rotation plan needs at least one step")
    for step in steps:
        if graph.edge_between(step.j, step.k) is None:
            raise ValueError(f"({step.j}, {step.k}) is not a graph edge")
    if start_node is None:
        start_node = steps[0].j
    if start_node not in graph.nodes:
        raise ValueError(f"start level {start_node} outside the graph")

    # ideal image of the start level in the d-dimensional level space
    v = np.zeros(graph.d)
    v[start_node] = 1.0
    for step in steps:
        c, s = math.cos(step.angle / 2.0), math.sin(step.angle / 2.0)
        vj, vk = v[step.j], v[step.k]
        v[step.j] = c * vj - s * vk
        v[step.k] = s * vj + c * vk
    comps = tuple(
        TargetComponent((str(node_label(n)),), float(v[n]))
        for n in graph.nodes
        if abs(v[n]) > 1e-12
    )
    stages = tuple(
        PlanStage(StageKind.ROTATION, step.realized_by,
                  edge=(step.j, step.k), angle=step.angle)
        for step in steps
    )
    return ProtocolPlan(
        stages=stages,
        initial=(TargetComponent((str(node_label(start_node)),), 1.0),),
        target=comps,
    )


def noon_plan(
    params_a: SystemParams,
    params_b: SystemParams,
    N: int,
    base_amplitude: float = DEFAULT_BASE_AMPLITUDE,
) -> ProtocolPlan:
    """Plan mapping the shared single-excitation state to the two-mode
    N-or-nothing superposition.

    Starts from (|1,+>_A |0>_B + |0>_A |1,+>_B)/sqrt(2). For even N a
    single branch-alternating transfer runs on both systems in parallel.
    Odd N needs the upper-to-lower doublet rotation first: that step is
    driven on the qubit-longitudinal channel (the transverse element
    between the doublet partners vanishes), which also leaves the other
    system's ground state strictly untouched. N=1 is just that one step.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    for p in (params_a, params_b):
        if N > p.n_max:
            raise ValueError(f"N={N} exceeds truncation n_max={p.n_max}")

    stages: list[PlanStage] = []
    if N % 2 == 0:
        ladder_a = _alternating_ladder(DressedLabel.plus(1), N)
        ladder_b = _alternating_ladder(DressedLabel.plus(1), N)
        stages.append(
            PlanStage(
                StageKind.PARALLEL,
                ladder_pulse(params_a, ladder_a, math.pi, base_amplitude),
                pulse_b=ladder_pulse(params_b, ladder_b, math.pi, base_amplitude),
            )
        )
    else:
        doublet = (DressedLabel.plus(1), DressedLabel.minus(1))
        stages.append(
            PlanStage(
                StageKind.PARALLEL,
                ladder_pulse(params_a, doublet, math.pi, base_amplitude,
                             channel=DriveOperator.QUBIT_LONGITUDINAL),
                pulse_b=ladder_pulse(params_b, doublet, math.pi, base_amplitude,
                                     channel=DriveOperator.QUBIT_LONGITUDINAL),
            )
        )
        if N > 1:
            ladder_a = _alternating_ladder(DressedLabel.minus(1), N)
            ladder_b = _alternating_ladder(DressedLabel.minus(1), N)
            stages.append(
                PlanStage(
                    StageKind.PARALLEL,
                    ladder_pulse(params_a, ladder_a, math.pi, base_amplitude),
                    pulse_b=ladder_pulse(params_b, ladder_b, math.pi, base_amplitude),
                )
            )

    root_half = 1.0 / math.sqrt(2.0)
    top = str(DressedLabel.minus(N))
    return ProtocolPlan(
        stages=tuple(stages),
        initial=(
            TargetComponent(("1+", "0"), root_half),
            TargetComponent(("0", "1+"), root_half),
        ),
        target=(
            TargetComponent((top, "0"), root_half),
            TargetComponent(("0", top), root_half),
        ),
        n_systems=2,
    )


# --- simulation ------------------------------------------------------------


@dataclass(frozen=True)
class PlanSimulation:
    """Outcome of simulating a plan.

    Single-system plans fill `stages` (one trajectory per stage);
    two-system plans fill `branches`, keyed by (system index, initial
    label), each holding that branch's per-stage trajectories.
    """

    fidelity: float
    stages: Optional[tuple[Trajectory, ...]] = None
    branches: Optional[dict[tuple[int, str], tuple[Trajectory, ...]]] = None


def _superposition(params: SystemParams, comps: Sequence[TargetComponent],
                   position: int) -> StateVector:
    dim = 2 * params.n_max + 1
    v = np.zeros(dim, dtype=np.complex128)
    for c in comps:
        label = DressedLabel.parse(c.labels[position])
        v[dressed_index(label, params.n_max)] += c.amplitude
    return StateVector(v)


def _run_branch(
    params: SystemParams,
    pulses: Sequence[Pulse],
    psi0: StateVector,
    config: SimulationConfig,
) -> tuple[tuple[Trajectory, ...], StateVector]:
    trajs = []
    psi = psi0
    for pulse in pulses:
        traj = propagate(params, pulse, psi, config=config)
        trajs.append(traj)
        psi = traj.final
    return tuple(trajs), psi


def simulate_plan(
    plan: ProtocolPlan,
    params: Union[SystemParams, tuple[SystemParams, SystemParams]],
    config: Optional[SimulationConfig] = None,
) -> PlanSimulation:
    """Propagate a plan's stages and score it against its target.

    Single-system plans evolve the initial superposition through the
    stage pulses in order. Two-system plans exploit the absence of any
    coupling between the systems: each distinct initial label of each
    system propagates independently through that system's stage pulses,
    and the joint overlap with the target is assembled from the per-
    branch amplitudes.
    """
    if config is None:
        config = SimulationConfig()

    if plan.n_systems == 1:
        if not isinstance(params, SystemParams):
            raise ValueError("single-system plan needs a single SystemParams")
        psi = _superposition(params, plan.initial, 0)
        target = _superposition(params, plan.target, 0)
        trajs, psi = _run_branch(
            params, [stage.pulse for stage in plan.stages], psi, config
        )
        overlap = np.vdot(target.amplitudes, psi.amplitudes)
        return PlanSimulation(fidelity=float(abs(overlap) ** 2), stages=trajs)

    if not (isinstance(params, tuple) and len(params) == 2
            and all(isinstance(p, SystemParams) for p in params)):
        raise ValueError("two-system plan needs a (params_a, params_b) pair")

    branches: dict[tuple[int, str], tuple[Trajectory, ...]] = {}
    finals: dict[tuple[int, str], StateVector] = {}
    for sys_idx, sys_params in enumerate(params):
        pulses = [
            stage.pulse if sys_idx == 0 else stage.pulse_b for stage in plan.stages
        ]
        if any(p is None for p in pulses):
            raise ValueError("two-system plan has a stage without both pulses")
        for comp in plan.initial:
            key = (sys_idx, comp.labels[sys_idx])
            if key in branches:
                continue
            label = DressedLabel.parse(comp.labels[sys_idx])
            psi0 = StateVector(
                _one_hot(sys_params, label)
            )
            trajs, psi = _run_branch(sys_params, pulses, psi0, config)
            branches[key] = trajs
            finals[key] = psi

    overlap = 0.0 + 0.0j
    for t_comp in plan.target:
        for i_comp in plan.initial:
            term = t_comp.amplitude * i_comp.amplitude
            factor = 1.0 + 0.0j
            for sys_idx, sys_params in enumerate(params):
                out = DressedLabel.parse(t_comp.labels[sys_idx])
                psi = finals[(sys_idx, i_comp.labels[sys_idx])]
                factor *= psi.amplitudes[dressed_index(out, sys_params.n_max)]
            overlap += term * factor
    return PlanSimulation(fidelity=float(abs(overlap) ** 2), branches=branches)


def _one_hot(params: SystemParams, label: DressedLabel) -> np.ndarray:
    v = np.zeros(2 * params.n_max + 1, dtype=np.complex128)
    v[dressed_index(label, params.n_max)] = 1.0
    return v


# --- serialization ---------------------------------------------------------
#
# Schema: {"n_systems": ..., "stages": [{"kind": ..., "pulse": {...},
# "pulse_b": {...}?, "edge": [j, k]?, "angle": ...?}], "initial": [...],
# "target": [{"labels": [...], "amplitude": ...}]}.


def plan_to_dict(plan: ProtocolPlan) -> dict:
    stages = []
    for stage in plan.stages:
        doc: dict = {"kind": stage.kind.value, "pulse": pulse_to_dict(stage.pulse)}
        if stage.pulse_b is not None:
            doc["pulse_b"] = pulse_to_dict(stage.pulse_b)
        if stage.edge is not None:
            doc["edge"] = list(stage.edge)
        if stage.angle is not None:
            doc["angle"] = stage.angle
        stages.append(doc)
    comps = lambda cs: [{"labels": list(c.labels), "amplitude": c.amplitude}
                        for c in cs]
    return {
        "n_systems": plan.n_systems,
        "stages": stages,
        "initial": comps(plan.initial),
        "target": comps(plan.target),
    }


def plan_from_dict(doc: dict) -> ProtocolPlan:
    stages = []
    for s in doc["stages"]:
        stages.append(
            PlanStage(
                kind=StageKind(s["kind"]),
                pulse=pulse_from_dict(s["pulse"]),
                pulse_b=pulse_from_dict(s["pulse_b"]) if "pulse_b" in s else None,
                edge=tuple(s["edge"]) if "edge" in s else None,
                angle=s.get("angle"),
            )
        )
    comps = lambda key: tuple(
        TargetComponent(tuple(c["labels"]), c["amplitude"]) for c in doc[key]
    )
    return ProtocolPlan(
        stages=tuple(stages),
        initial=comps("initial"),
        target=comps("target"),
        n_systems=doc["n_systems"],
    )


def save_plan(plan: ProtocolPlan, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(plan_to_dict(plan), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_plan(path) -> ProtocolPlan:
    with open(path, encoding="utf-8") as fh:
        return plan_from_dict(json.load(fh))
