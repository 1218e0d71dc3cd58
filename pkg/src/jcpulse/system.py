"""Dressed-state toolbox for a resonantly coupled qubit-resonator ladder.

Conventions used throughout the package:

* Stored frequencies are ordinary frequencies in MHz (angular frequency
  divided by 2*pi); times are in ns.  Since 1 MHz * 1 ns = 1e-3 cycles,
  phases are always formed as ``PHASE_PER_MHZ_NS * f_mhz * t_ns``.
* The product basis |q, n> (qubit q in {0, 1}, photon number n <= n_max)
  is ordered with flat index ``q * (n_max + 1) + n``.
* The static Hamiltonian conserves the excitation number q + n, so it
  splits into the ground state |0, 0> and 2x2 doublet blocks spanned by
  {|0, n>, |1, n-1>}.  The eigenstates of block n are labelled |n, ->
  (lower energy) and |n, +> (upper energy); all energies are reported
  relative to the ground state.
* Dressed eigenvectors are fixed to the gauge in which <0, n | n, +-> is
  real and non-negative.  With this choice every drive matrix element
  below is real.

The labelled dressed states (ground plus n_max doublets, 2*n_max + 1 in
total) form the simulation basis used by :mod:`jcpulse.dynamics`.  The
one remaining eigenstate of the truncated product space, the unpaired
|1, n_max>, carries excitation number n_max + 1 and is excluded; the
truncation is therefore by excitation number, and its adequacy is what
:func:`jcpulse.dynamics.convergence_check` probes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

# Phase in radians accumulated per (MHz * ns).
PHASE_PER_MHZ_NS = 2.0e-3 * math.pi

# Tolerance scale for "cannot happen" numerical checks.
_RESIDUAL_RTOL = 1e-10


class DriveOperator(enum.Enum):
    """Physical drive channels, as operators on the product space."""

    QUBIT_TRANSVERSE = "qubit_transverse"        # sigma_x
    QUBIT_LONGITUDINAL = "qubit_longitudinal"    # sigma_+ sigma_-
    RESONATOR_POSITION = "resonator_position"    # a + a^dagger


@dataclass(frozen=True)
class SystemParams:
    """Static parameters of the qubit-resonator system.

    Parameters
    ----------
    omega_r : float
        Resonator frequency in MHz.
    delta : float
        Qubit-resonator detuning omega_q - omega_r in MHz.
    g : float
        Transverse coupling rate in MHz (must be positive).
    n_max : int
        Photon-number truncation; doublets n = 1 .. n_max are kept.
    """

    omega_r: float
    delta: float
    g: float
    n_max: int

    def __post_init__(self) -> None:
        if self.omega_r <= 0:
            raise ValueError(f"omega_r must be positive, got {self.omega_r}")
        if self.g <= 0:
            raise ValueError(f"g must be positive, got {self.g}")
        if self.n_max < 1:
            raise ValueError(f"n_max must be at least 1, got {self.n_max}")

    @property
    def omega_q(self) -> float:
        """Qubit frequency omega_r + delta in MHz."""
        return self.omega_r + self.delta

    @property
    def product_dim(self) -> int:
        """Dimension of the truncated product space."""
        return 2 * (self.n_max + 1)

    @property
    def dressed_dim(self) -> int:
        """Number of labelled dressed states (ground + two per doublet)."""
        return 2 * self.n_max + 1

    def product_index(self, q: int, n: int) -> int:
        """Flat index of |q, n> in the product basis."""
        if q not in (0, 1) or not 0 <= n <= self.n_max:
            raise ValueError(f"state |{q}, {n}> outside the truncated space")
        return q * (self.n_max + 1) + n


@dataclass(frozen=True, order=True)
class DressedLabel:
    """Label of a dressed eigenstate: ground, |n, ->, or |n, +>.

    The string form is "0" for the ground state and e.g. "3-" / "3+" for
    the doublet states; it is used in CSV headers and CLI arguments.
    """

    n: int
    branch: str = ""

    def __post_init__(self) -> None:
        if self.n == 0:
            if self.branch:
                raise ValueError("ground label carries no branch")
        elif self.n > 0:
            if self.branch not in ("-", "+"):
                raise ValueError(f"branch must be '-' or '+', got {self.branch!r}")
        else:
            raise ValueError(f"level must be non-negative, got {self.n}")

    @classmethod
    def ground(cls) -> "DressedLabel":
        return cls(0)

    @classmethod
    def minus(cls, n: int) -> "DressedLabel":
        return cls(n, "-")

    @classmethod
    def plus(cls, n: int) -> "DressedLabel":
        return cls(n, "+")

    @classmethod
    def parse(cls, text: str) -> "DressedLabel":
        """Inverse of str(): "0" -> ground, "4-" -> minus(4), "3+" -> plus(3)."""
        text = text.strip()
        if text == "0":
            return cls.ground()
        if text and text[-1] in "+-":
            try:
                return cls(int(text[:-1]), text[-1])
            except ValueError:
                pass
        raise ValueError(f"not a dressed-state label: {text!r}")

    @property
    def is_ground(self) -> bool:
        return self.n == 0

    def __str__(self) -> str:
        return "0" if self.is_ground else f"{self.n}{self.branch}"


def dressed_basis_labels(n_max: int) -> list[DressedLabel]:
    """Canonical dressed-basis order: ground, 1-, 1+, 2-, 2+, ..."""
    labels = [DressedLabel.ground()]
    for n in range(1, n_max + 1):
        labels.append(DressedLabel.minus(n))
        labels.append(DressedLabel.plus(n))
    return labels


def dressed_index(label: DressedLabel, n_max: int) -> int:
    """Position of a label in the canonical dressed-basis order."""
    if label.n > n_max:
        raise ValueError(f"label {label} outside truncation n_max={n_max}")
    if label.is_ground:
        return 0
    return 2 * label.n - (1 if label.branch == "-" else 0)


@dataclass(frozen=True)
class DressedState:
    """One labelled eigenstate of the static Hamiltonian.

    energy is in MHz relative to the ground state; vector holds the
    product-basis amplitudes in the flat |q, n> order.
    """

    label: DressedLabel
    energy: float
    vector: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class TransitionSet:
    """The four drive-relevant transition frequencies out of doublet n.

    w_plus and w_minus stay within the +/- branches (|n,+> -> |n+1,+>
    and |n,-> -> |n+1,->); w_up and w_down hop across branches
    (|n,-> -> |n+1,+> and |n,+> -> |n+1,->).  All values in MHz.
    """

    n: int
    w_plus: float
    w_minus: float
    w_up: float
    w_down: float


@dataclass(frozen=True)
class DispersiveApprox:
    """Large-detuning approximations to the transition families at n."""

    n: int
    w_up: float
    w_plus: float
    w_minus: float


def build_static_hamiltonian(params: SystemParams) -> np.ndarray:
    """Static Hamiltonian over the product basis, in MHz.

    H = omega_q |1><1| + omega_r a^dag a + g (a sigma_+ + a^dag sigma_-),
    all divided by 2*pi*hbar so entries are ordinary frequencies.
    """
    nq = params.n_max + 1
    H = np.zeros((2 * nq, 2 * nq))
    for n in range(nq):
        H[params.product_index(0, n), params.product_index(0, n)] = params.omega_r * n
        H[params.product_index(1, n), params.product_index(1, n)] = (
            params.omega_q + params.omega_r * n
        )
    # a sigma_+ : |0, n> -> sqrt(n) |1, n-1>
    for n in range(1, nq):
        i, j = params.product_index(1, n - 1), params.product_index(0, n)
        H[i, j] = H[j, i] = params.g * math.sqrt(n)
    return H


def doublet_energies(params: SystemParams, n: int) -> tuple[float, float]:
    """Closed-form (E_minus, E_plus) of doublet n, in MHz relative to ground."""
    if n < 1:
        raise ValueError("doublets start at n = 1")
    r = math.hypot(params.delta, 2.0 * params.g * math.sqrt(n))
    base = n * params.omega_r + 0.5 * params.delta
    return base - 0.5 * r, base + 0.5 * r


def dressed_eigensystem(params: SystemParams) -> list[DressedState]:
    """All labelled dressed states, in canonical order.

    Each doublet block {|0, n>, |1, n-1>} is diagonalized numerically and
    the two eigenpairs are matched against the closed-form energies; a
    mismatch (impossible for g > 0) raises RuntimeError.  Eigenvector
    gauge: <0, n | n, +-> real and non-negative.
    """
    H = build_static_hamiltonian(params)
    scale = np.linalg.norm(H)
    e_ground = H[0, 0]  # zero by construction; kept as the explicit offset

    ground_vec = np.zeros(params.product_dim)
    ground_vec[params.product_index(0, 0)] = 1.0
    states = [DressedState(DressedLabel.ground(), 0.0, ground_vec)]

    for n in range(1, params.n_max + 1):
        idx = [params.product_index(0, n), params.product_index(1, n - 1)]
        evals, evecs = np.linalg.eigh(H[np.ix_(idx, idx)])
        e_minus, e_plus = doublet_energies(params, n)
        for k, (label, e_ref) in enumerate(
            [(DressedLabel.minus(n), e_minus), (DressedLabel.plus(n), e_plus)]
        ):
            energy = evals[k] - e_ground
            if abs(energy - e_ref) > _RESIDUAL_RTOL * max(scale, 1.0):
                raise RuntimeError(
                    f"eigenvalue of {label} does not match its closed form: "
                    f"{energy} vs {e_ref}"
                )
            vec = np.zeros(params.product_dim)
            vec[idx] = evecs[:, k]
            # gauge fix on the <0, n| component (falls back to <1, n-1|
            # only in the untruncated-detuning limit where it vanishes)
            pivot = vec[idx[0]] if abs(vec[idx[0]]) > 1e-12 else vec[idx[1]]
            if pivot < 0:
                vec = -vec
            resid = np.linalg.norm(H @ vec - evals[k] * vec)
            if resid > _RESIDUAL_RTOL * max(scale, 1.0):
                raise RuntimeError(f"eigen-residual {resid} too large for {label}")
            states.append(DressedState(label, energy, vec))
    return states


def dressed_energies(params: SystemParams) -> np.ndarray:
    """Energies of the labelled dressed states in canonical order, MHz."""
    return np.array([s.energy for s in dressed_eigensystem(params)])


def transition_frequencies(params: SystemParams, n: int) -> TransitionSet:
    """The four transition families out of doublet n (n = 0 uses the ground
    state as the lower level, with the formal root |delta|).

    w_plus/minus = omega_r +- (r_{n+1} - r_n)/2 and w_up/down =
    omega_r +- (r_{n+1} + r_n)/2 where r_n = sqrt(delta^2 + 4 n g^2).
    The identity w_up + w_down = 2 omega_r holds exactly.
    """
    if not 0 <= n <= params.n_max - 1:
        raise ValueError(f"transition index n={n} requires 0 <= n <= n_max-1")
    r_n = math.hypot(params.delta, 2.0 * params.g * math.sqrt(n))
    r_n1 = math.hypot(params.delta, 2.0 * params.g * math.sqrt(n + 1))
    half_diff = 0.5 * (r_n1 - r_n)
    half_sum = 0.5 * (r_n1 + r_n)
    return TransitionSet(
        n=n,
        w_plus=params.omega_r + half_diff,
        w_minus=params.omega_r - half_diff,
        w_up=params.omega_r + half_sum,
        w_down=params.omega_r - half_sum,
    )


def _product_operator(params: SystemParams, kind: DriveOperator) -> np.ndarray:
    nq = params.n_max + 1
    op = np.zeros((2 * nq, 2 * nq))
    if kind is DriveOperator.QUBIT_TRANSVERSE:
        for n in range(nq):
            i, j = params.product_index(0, n), params.product_index(1, n)
            op[i, j] = op[j, i] = 1.0
    elif kind is DriveOperator.QUBIT_LONGITUDINAL:
        for n in range(nq):
            i = params.product_index(1, n)
            op[i, i] = 1.0
    elif kind is DriveOperator.RESONATOR_POSITION:
        for q in (0, 1):
            for n in range(nq - 1):
                i, j = params.product_index(q, n), params.product_index(q, n + 1)
                op[i, j] = op[j, i] = math.sqrt(n + 1)
    else:  # pragma: no cover - enum is exhaustive
        raise ValueError(f"unknown drive operator {kind}")
    return op


def drive_matrix_elements(params: SystemParams, kind: DriveOperator) -> np.ndarray:
    """Drive operator in the labelled dressed basis (real symmetric).

    Entry [j, k] is <j| O |k> for dressed states in canonical order, with
    O the product-space operator of the requested channel.  Computed
    directly from the eigenvectors, so it includes every coupling the
    truncated space supports (in particular the same-branch sigma_x
    elements <n+1, -|sigma_x|n, -> = -1/2 and <n+1, +|sigma_x|n, +> = +1/2
    at zero detuning, alongside the cross-branch +-1/2 pairs).
    """
    states = dressed_eigensystem(params)
    V = np.column_stack([s.vector for s in states])
    M = V.T @ _product_operator(params, kind) @ V
    if not np.allclose(M, M.T, atol=1e-12):  # pragma: no cover - symmetry is exact
        raise RuntimeError("dressed drive matrix lost hermiticity")
    return 0.5 * (M + M.T)


def dispersive_approximations(params: SystemParams, n: int) -> DispersiveApprox:
    """Large-detuning (|delta| >> g sqrt(n)) approximations at index n.

    w_up is Stark-shifted qubit-like, omega_q + (2n+1) g^2/delta; the
    branch-preserving pair is Kerr-shifted resonator-like,
    omega_r +- [g^2/delta - (2n+1) g^4/delta^3].
    """
    if params.delta == 0:
        raise ValueError("dispersive approximation undefined at zero detuning")
    if not 0 <= n <= params.n_max - 1:
        raise ValueError(f"transition index n={n} requires 0 <= n <= n_max-1")
    g2_over_d = params.g**2 / params.delta
    kerr = g2_over_d - (2 * n + 1) * params.g**4 / params.delta**3
    return DispersiveApprox(
        n=n,
        w_up=params.omega_q + (2 * n + 1) * g2_over_d,
        w_plus=params.omega_r + kerr,
        w_minus=params.omega_r - kerr,
    )


def min_frequency_separation(freqs) -> float:
    """Smallest pairwise |difference| of a list of frequencies (MHz)."""
    freqs = np.asarray(freqs, dtype=float)
    if freqs.size < 2:
        raise ValueError("need at least two frequencies")
    s = np.sort(freqs)
    return float(np.min(np.diff(s)))
