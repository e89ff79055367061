"""Exact two-electron ground states and tensor-product resolution enhancement.

The two-electron spatial wavefunction is expanded as
Psi(x0, x1) = sum_{k0 k1} C_{k0 k1} chi_{k0}(x0) chi_{k1}(x1)
with C symmetric (singlet) or antisymmetric (triplet). Ground truth comes from
dense diagonalization of the first-quantized Hamiltonian restricted to the
matching exchange-symmetry subspace. A trained one-particle model enhances
resolution by acting on each electron register with the same unitary, which
preserves the exchange sector exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import basis as pwb
from . import circuits, sim
from .basis import Geometry, PlaneWaveBasis
from .circuits import AnsatzConfig, NO_ANSATZ, SampleData
from .dataset import CaseConfig
from .sim import Statevector

SINGLET = "singlet"
TRIPLET = "triplet"

_SYMMETRY_TOL = 1e-10


class TwoElectronError(Exception):
    pass


@dataclass(frozen=True)
class TwoElectronState:
    """Normalized coefficient matrix C_{k0 k1} of a two-electron spatial part."""

    basis: PlaneWaveBasis
    C: np.ndarray
    symmetry: str

    def __post_init__(self):
        C = np.asarray(self.C, dtype=complex)
        if C.shape != (self.basis.n_pw, self.basis.n_pw):
            raise TwoElectronError("coefficient matrix does not match basis size")
        if self.symmetry not in (SINGLET, TRIPLET):
            raise TwoElectronError(f"unknown symmetry {self.symmetry!r}")
        sign = 1.0 if self.symmetry == SINGLET else -1.0
        if np.max(np.abs(C - sign * C.T)) > _SYMMETRY_TOL:
            raise TwoElectronError(f"matrix violates {self.symmetry} exchange symmetry")
        if abs(np.sum(np.abs(C) ** 2) - 1.0) > 1e-8:
            raise TwoElectronError("coefficient matrix is not normalized")
        object.__setattr__(self, "C", C)


def grid_momenta(n_qubits: int) -> np.ndarray:
    """Signed momentum index for each FFT grid index, Nyquist mapped to
    j = -2**(n-1) so every grid point is an ordinary plane wave."""
    half = 2 ** (n_qubits - 1)
    m = np.arange(2**n_qubits)
    return np.where(m < half, m, m - 2**n_qubits)


def two_electron_hamiltonian(L: float, js, geom: Geometry,
                             include_ee: bool = True) -> np.ndarray:
    """Dense two-electron Hamiltonian over the product basis of the momentum
    indices ``js`` per electron; includes the nuclear repulsion constant.

    The electron-electron block couples (a, b) -> (c, d) with strength
    v_exp(k_a - k_c) under integer momentum conservation j_a + j_b = j_c + j_d.
    """
    js = np.asarray(js, dtype=int)
    n = len(js)
    h1 = pwb.one_body_hamiltonian(L, js, geom)
    eye = np.eye(n)
    h = np.kron(h1, eye) + np.kron(eye, h1)
    if include_ee:
        k = 2.0 * np.pi * js / L
        vmat = pwb.v_exp_fourier(L, k[:, None] - k[None, :])  # (a, c)
        cons = (js[:, None, None, None] + js[None, :, None, None]
                == js[None, None, :, None] + js[None, None, None, :])
        vee = vmat[:, None, :, None] * cons
        h = h + vee.reshape(n * n, n * n)
    return h + pwb.nuclear_repulsion(geom) * np.eye(n * n)


def _symmetry_projector(n: int, symmetry: str) -> np.ndarray:
    """Columns: orthonormal basis of the symmetric or antisymmetric subspace
    of the n x n product space."""
    cols = []
    root = 1.0 / np.sqrt(2.0)
    for a in range(n):
        for b in range(a, n):
            col = np.zeros(n * n)
            if a == b:
                if symmetry == TRIPLET:
                    continue
                col[a * n + a] = 1.0
            else:
                col[a * n + b] = root
                col[b * n + a] = root if symmetry == SINGLET else -root
            cols.append(col)
    return np.column_stack(cols)


def solve_two_electron(basis: PlaneWaveBasis, geom: Geometry, symmetry: str,
                       include_ee: bool = True) -> tuple[TwoElectronState, float]:
    """Lowest eigenpair of the two-electron Hamiltonian in the requested
    exchange-symmetry sector; the returned energy includes E_nn."""
    if symmetry not in (SINGLET, TRIPLET):
        raise TwoElectronError(f"unknown symmetry {symmetry!r}")
    h = two_electron_hamiltonian(basis.L, basis.j_indices, geom, include_ee)
    p = _symmetry_projector(basis.n_pw, symmetry)
    hred = p.T @ h @ p
    evals, evecs = np.linalg.eigh(hred)
    vec = p @ evecs[:, 0]
    # deterministic gauge: largest amplitude real positive
    pivot = np.argmax(np.abs(vec))
    vec = vec * (np.abs(vec[pivot]) / vec[pivot])
    C = vec.reshape(basis.n_pw, basis.n_pw)
    return TwoElectronState(basis, C, symmetry), float(evals[0])


def embed_on_grid(state: TwoElectronState, n_qubits: int) -> Statevector:
    """Place C_{k0 k1} on the 2*n_qubits register at the FFT indices of the
    signed momenta; all other amplitudes (including Nyquist) stay zero."""
    dim = 2**n_qubits
    if state.basis.j_max >= dim // 2:
        raise TwoElectronError("basis momenta exceed the qubit grid")
    idx = np.array([sim.momentum_index(j, n_qubits) for j in state.basis.j_indices])
    grid = np.zeros((dim, dim), dtype=complex)
    grid[np.ix_(idx, idx)] = state.C
    return Statevector(2 * n_qubits, grid.reshape(-1))


def enhance_two_electron(state_lr: TwoElectronState, model: tuple[AnsatzConfig, np.ndarray],
                         sample: SampleData, case: CaseConfig) -> Statevector:
    """Apply the trained one-particle enhancement to both electron registers.

    Equivalent to padding each register onto the HR grid, then acting with
    U(theta) U_shift on each; the identical per-register unitary keeps the
    exchange symmetry of the input.
    """
    ansatz, theta = model
    if state_lr.basis.n_pw != case.n_pw_lr:
        raise TwoElectronError("input state does not match the case LR basis")
    if ansatz.family != NO_ANSATZ and ansatz.n_qubits != case.n_hr:
        raise TwoElectronError("model register size does not match the case")
    n = case.n_hr
    amps = embed_on_grid(state_lr, n).amps
    phases = circuits.shift_phases(case.L, n, sample.d_cm)
    amps = amps * np.kron(phases, phases)
    theta = np.asarray(theta, dtype=float)
    ctx = {"potential": sample.potential_grid}
    ops = circuits.ansatz_ops(ansatz, start=0) + circuits.ansatz_ops(ansatz, start=n)
    amps = circuits.apply_ops(ops, amps, 2 * n, theta, ctx)
    return Statevector(2 * n, amps)


def two_electron_fidelity(pred: Statevector, truth: TwoElectronState) -> float:
    """Squared overlap of a predicted 2*n-qubit state with an exact state
    embedded on the same grid."""
    n = pred.n_qubits // 2
    return sim.fidelity(pred, embed_on_grid(truth, n))


def energy_expectation(state: Statevector, hamiltonian: np.ndarray) -> float:
    """Real expectation value <Psi|H|Psi> of a normalized two-electron state."""
    return float(np.real(np.vdot(state.amps, hamiltonian @ state.amps)))


def product_fidelity_estimate(orbital_fidelities) -> float:
    """Many-electron fidelity estimate as the product of occupied one-orbital
    fidelities."""
    fids = np.asarray(orbital_fidelities, dtype=float)
    if np.any((fids < 0.0) | (fids > 1.0 + 1e-12)):
        raise TwoElectronError("orbital fidelities must lie in [0, 1]")
    return float(np.prod(fids))
