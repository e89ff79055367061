"""Composite unitaries: initialization, center-of-mass shift, the two ansatz
families, and the linear-interpolation baseline.

Circuits are lists of small op objects. Every op knows how to apply itself,
its adjoint, and (when parameterized) its parameter derivative, which is what
the trainer's reverse-mode gradient needs. Ops read per-sample data (the
effective potential grid) from a context dict so a whole batch of samples can
be pushed through one circuit at once.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import sim
from .basis import Geometry, potential_on_grid
from .sim import Statevector

ANSATZ1 = "ansatz1"
ANSATZ2 = "ansatz2"
NO_ANSATZ = "none"


@dataclass(frozen=True)
class AnsatzConfig:
    """Ansatz family, width, and depth; fixes the parameter layout."""

    family: str
    n_qubits: int = 0
    n_layers: int = 0
    n_sublayers: int = 0

    def __post_init__(self):
        if self.family not in (ANSATZ1, ANSATZ2, NO_ANSATZ):
            raise ValueError(f"unknown ansatz family {self.family!r}")

    @property
    def n_params(self) -> int:
        nq = self.n_qubits
        if self.family == ANSATZ1:
            return nq * (self.n_layers + 1)
        if self.family == ANSATZ2:
            return self.n_layers * (1 + 2 * nq * (self.n_sublayers + 1))
        return 0

    @staticmethod
    def ansatz1(n_qubits: int, n_layers: int = 32) -> "AnsatzConfig":
        return AnsatzConfig(ANSATZ1, n_qubits, n_layers)

    @staticmethod
    def ansatz2(n_qubits: int, n_layers: int = 3, n_sublayers: int = 8) -> "AnsatzConfig":
        return AnsatzConfig(ANSATZ2, n_qubits, n_layers, n_sublayers)

    @staticmethod
    def none(n_qubits: int = 0) -> "AnsatzConfig":
        return AnsatzConfig(NO_ANSATZ, n_qubits)


@dataclass(frozen=True)
class SampleData:
    """Per-sample classical data fed into the data-dependent ansatz."""

    geometry: Geometry
    potential_grid: np.ndarray  # V(x_m), length 2**n on the enhanced register
    d_cm: float

    @staticmethod
    def from_geometry(geom: Geometry, L: float, n_qubits: int) -> "SampleData":
        return SampleData(geom, potential_on_grid(L, geom, n_qubits), geom.d_cm)


# --- circuit ops -------------------------------------------------------------

class Op:
    """One circuit element acting on batched amplitudes (..., 2**n)."""

    pidx: int | None = None

    def apply(self, amps, n, theta, ctx):
        raise NotImplementedError

    def apply_dagger(self, amps, n, theta, ctx):
        raise NotImplementedError

    def apply_deriv(self, amps, n, theta, ctx):
        """Apply dG/d(theta[pidx]); only for parameterized ops."""
        raise NotImplementedError


@dataclass
class RotOp(Op):
    axis: str
    qubit: int
    pidx: int

    def apply(self, amps, n, theta, ctx):
        return sim.apply_rotation(amps, n, self.qubit, self.axis, theta[self.pidx])

    def apply_dagger(self, amps, n, theta, ctx):
        return sim.apply_rotation(amps, n, self.qubit, self.axis, -theta[self.pidx])

    def apply_deriv(self, amps, n, theta, ctx):
        out = self.apply(amps, n, theta, ctx)
        return -0.5j * sim.apply_pauli(out, n, self.qubit, self.axis)


@dataclass
class CnotOp(Op):
    control: int
    target: int

    def apply(self, amps, n, theta, ctx):
        return sim.apply_cnot(amps, n, self.control, self.target)

    apply_dagger = apply


@dataclass
class QftOp(Op):
    start: int
    size: int
    inverse: bool = False

    def apply(self, amps, n, theta, ctx):
        return sim.apply_qft(amps, n, self.start, self.size, inverse=self.inverse)

    def apply_dagger(self, amps, n, theta, ctx):
        return sim.apply_qft(amps, n, self.start, self.size, inverse=not self.inverse)


@dataclass
class PotentialPhaseOp(Op):
    """exp(-i theta V(x)) on a register, with V per sample from ctx['potential']."""

    start: int
    size: int
    pidx: int

    def _grid(self, ctx):
        return ctx["potential"]  # (..., 2**size)

    def apply(self, amps, n, theta, ctx):
        v = self._grid(ctx)
        return sim.apply_diag_subregister(
            amps, n, self.start, self.size, np.exp(-1j * theta[self.pidx] * v)
        )

    def apply_dagger(self, amps, n, theta, ctx):
        v = self._grid(ctx)
        return sim.apply_diag_subregister(
            amps, n, self.start, self.size, np.exp(1j * theta[self.pidx] * v)
        )

    def apply_deriv(self, amps, n, theta, ctx):
        v = self._grid(ctx)
        out = self.apply(amps, n, theta, ctx)
        return sim.apply_diag_subregister(amps=out, n=n, start=self.start,
                                          size=self.size, diag=-1j * v)


def entangler_ops(n_qubits: int, start: int = 0) -> list[Op]:
    """Open CNOT chain: control i, target i+1, for i = 0..n_q-2."""
    return [CnotOp(start + i, start + i + 1) for i in range(n_qubits - 1)]


def ansatz_ops(config: AnsatzConfig, start: int = 0) -> list[Op]:
    """Build the op list of an ansatz acting on qubits [start, start+n_q)."""
    nq = config.n_qubits
    ops: list[Op] = []
    if config.family == NO_ANSATZ:
        return ops
    if config.family == ANSATZ1:
        ops += [RotOp("y", start + q, q) for q in range(nq)]
        for layer in range(1, config.n_layers + 1):
            ops += entangler_ops(nq, start)
            ops += [RotOp("y", start + q, layer * nq + q) for q in range(nq)]
        return ops
    # ansatz 2: per layer, a potential-phase sandwich then a HEA block.
    stride = 1 + 2 * nq * (config.n_sublayers + 1)
    for layer in range(config.n_layers):
        base = layer * stride
        ops.append(QftOp(start, nq))
        ops.append(PotentialPhaseOp(start, nq, base))
        ops.append(QftOp(start, nq, inverse=True))
        for sub in range(config.n_sublayers + 1):
            if sub > 0:
                ops += entangler_ops(nq, start)
            for q in range(nq):
                rx = base + 1 + 2 * (sub * nq + q)
                ops.append(RotOp("x", start + q, rx))
                ops.append(RotOp("z", start + q, rx + 1))
    return ops


def apply_ops(ops, amps, n, theta, ctx=None):
    ctx = ctx or {}
    for op in ops:
        amps = op.apply(amps, n, theta, ctx)
    return amps


# --- composite unitaries on single statevectors ------------------------------

def prepend_ancilla(state: Statevector) -> Statevector:
    """Adjoin a |0> ancilla as the new most significant qubit."""
    amps = np.zeros(2 ** (state.n_qubits + 1), dtype=complex)
    amps[: 2**state.n_qubits] = state.amps
    return Statevector(state.n_qubits + 1, amps)


def u_init(state: Statevector) -> Statevector:
    """Relocate negative frequencies to the top of the doubled index range.

    ``state`` holds the low-resolution register with a |0> ancilla already in
    front (most significant). A single CNOT (control = old sign qubit,
    target = ancilla) moves index j + 2**n_LR to j + 2**n_HR for j < 0.
    """
    n = state.n_qubits
    if np.any(np.abs(state.amps[2 ** (n - 1):]) > 1e-12):
        raise sim.SimError("u_init requires the ancilla qubit in |0>")
    amps = sim.apply_cnot(state.amps, n, control=1, target=0)
    return Statevector(n, amps)


def shift_phases(L: float, n_qubits: int, d_cm: float) -> np.ndarray:
    """Diagonal of the center-of-mass shift: exp(i k_j d_cm) per frequency.

    The Nyquist index carries no plane wave and is left untouched.
    """
    idx = np.arange(2**n_qubits)
    js = sim.index_to_momentum(idx, n_qubits)
    phases = np.exp(1j * (2.0 * np.pi / L) * js * d_cm)
    phases[2 ** (n_qubits - 1)] = 1.0
    return phases


def u_shift(state: Statevector, d_cm: float, L: float) -> Statevector:
    return Statevector(state.n_qubits, state.amps * shift_phases(L, state.n_qubits, d_cm))


def apply_ansatz1(state: Statevector, theta, config: AnsatzConfig) -> Statevector:
    if config.family != ANSATZ1:
        raise ValueError("config is not an ansatz-1 configuration")
    theta = _check_theta(theta, config)
    amps = apply_ops(ansatz_ops(config), state.amps, state.n_qubits, theta)
    return Statevector(state.n_qubits, amps)


def apply_ansatz2(state: Statevector, theta, sample: SampleData,
                  config: AnsatzConfig) -> Statevector:
    if config.family != ANSATZ2:
        raise ValueError("config is not an ansatz-2 configuration")
    theta = _check_theta(theta, config)
    grid = np.asarray(sample.potential_grid, dtype=float)
    if grid.shape != (2**config.n_qubits,):
        raise ValueError("potential grid length must be 2**n_qubits")
    ctx = {"potential": grid}
    amps = apply_ops(ansatz_ops(config), state.amps, state.n_qubits, theta, ctx)
    return Statevector(state.n_qubits, amps)


def _check_theta(theta, config: AnsatzConfig) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (config.n_params,):
        raise ValueError(
            f"expected {config.n_params} parameters, got {theta.shape}"
        )
    return theta


# --- linear interpolation baseline -------------------------------------------

def interpolate_linear(coeffs_lr, n_hr: int) -> Statevector:
    """Real-space linear interpolation onto the doubled grid.

    Pipeline: encode the momentum coefficients, transform to the 2**n_LR real
    grid f, interleave g[2j] = f[j], g[2j+1] = (f[j] + f[j+1])/2 with periodic
    wrap, renormalize (post-selected branch), and transform back on n_HR
    qubits. The outputs of different inputs are not mutually orthogonal.
    """
    state = sim.encode_amplitudes(coeffs_lr, n_hr - 1)
    f = sim.apply_qft(state.amps, n_hr - 1)
    g = np.empty(2**n_hr, dtype=complex)
    g[0::2] = f
    g[1::2] = 0.5 * (f + np.roll(f, -1))
    g /= np.linalg.norm(g)
    out = sim.apply_qft(g, n_hr, inverse=True)
    return Statevector(n_hr, out)
