"""Exact statevector simulation kernels.

Convention (fixed, asserted in tests): qubit 0 is the most significant bit
of the computational basis index, so a basis index b assigns qubit q the bit
(b >> (n - 1 - q)) & 1.

All kernels act on the last axis of an array, so a batch of statevectors of
shape (batch, 2**n) goes through the same code path as a single state.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SimError(Exception):
    pass


class NormalizationError(SimError):
    pass


class IndexOverflowError(SimError):
    pass


@dataclass
class Statevector:
    """Normalized complex amplitudes over 2**n_qubits basis states."""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=complex)
        if self.amps.shape != (2**self.n_qubits,):
            raise SimError("amplitude vector length must be 2**n_qubits")
        if abs(np.sum(np.abs(self.amps) ** 2) - 1.0) > 1e-10:
            raise NormalizationError("statevector is not normalized")

    def copy(self) -> "Statevector":
        return Statevector(self.n_qubits, self.amps.copy())


# --- momentum index map (FFT ordering) -------------------------------------

def momentum_index(j, n_qubits: int):
    """Basis index of signed frequency j: j for j >= 0, j + 2**n for j < 0."""
    return np.mod(np.asarray(j), 2**n_qubits)


def index_to_momentum(idx, n_qubits: int):
    """Inverse of momentum_index on {-2**(n-1), ..., 2**(n-1) - 1}."""
    idx = np.asarray(idx)
    half = 2 ** (n_qubits - 1)
    return np.where(idx < half, idx, idx - 2**n_qubits)


def encode_amplitudes(coeffs, n_qubits: int) -> Statevector:
    """Amplitude-encode coefficients indexed by signed j (ascending order).

    ``coeffs`` has odd length n_pw covering j = -j_max..j_max. The Nyquist
    index 2**(n-1) and any other unmapped index carry zero amplitude.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    n_pw = coeffs.shape[0]
    if n_pw % 2 == 0:
        raise SimError("coefficient vector must have odd length")
    j_max = (n_pw - 1) // 2
    if j_max >= 2 ** (n_qubits - 1):
        raise IndexOverflowError(
            f"{n_pw} plane waves do not fit in {n_qubits} qubits"
        )
    norm2 = float(np.sum(np.abs(coeffs) ** 2))
    if abs(norm2 - 1.0) > 1e-6:
        raise NormalizationError(f"coefficient norm^2 = {norm2!r}, expected 1")
    coeffs = coeffs / np.sqrt(norm2)
    amps = np.zeros(2**n_qubits, dtype=complex)
    js = np.arange(-j_max, j_max + 1)
    amps[momentum_index(js, n_qubits)] = coeffs
    return Statevector(n_qubits, amps)


def decode_amplitudes(state: Statevector, n_pw: int) -> np.ndarray:
    """Read signed-j coefficients back out of an encoded state."""
    j_max = (n_pw - 1) // 2
    js = np.arange(-j_max, j_max + 1)
    return state.amps[momentum_index(js, state.n_qubits)].copy()


# --- gate kernels (batched over leading axes) -------------------------------

_PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2.0), np.sin(angle / 2.0)
    if axis == "x":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if axis == "y":
        return np.array([[c, -s], [s, c]])
    if axis == "z":
        return np.array([[c - 1j * s, 0.0], [0.0, c + 1j * s]])
    raise SimError(f"unknown rotation axis {axis!r}")


def apply_single(amps, n: int, qubit: int, mat) -> np.ndarray:
    """Apply a 2x2 matrix to one qubit of (..., 2**n) amplitudes."""
    if not 0 <= qubit < n:
        raise SimError("qubit index out of range")
    lead = amps.shape[:-1]
    a = amps.reshape(lead + (2**qubit, 2, 2 ** (n - 1 - qubit)))
    x0 = a[..., 0, :]
    x1 = a[..., 1, :]
    out = np.empty_like(a)
    out[..., 0, :] = mat[0, 0] * x0 + mat[0, 1] * x1
    out[..., 1, :] = mat[1, 0] * x0 + mat[1, 1] * x1
    return out.reshape(amps.shape)


def apply_rotation(amps, n, qubit, axis, angle):
    return apply_single(amps, n, qubit, rotation_matrix(axis, angle))


def apply_pauli(amps, n, qubit, axis):
    return apply_single(amps, n, qubit, _PAULI[axis])


def _bit_axes(amps, n):
    lead = amps.shape[:-1]
    return amps.reshape(lead + (2,) * n), len(lead)


def apply_cnot(amps, n: int, control: int, target: int) -> np.ndarray:
    if control == target:
        raise SimError("control and target must differ")
    for q in (control, target):
        if not 0 <= q < n:
            raise SimError("qubit index out of range")
    a, off = _bit_axes(amps, n)
    i10 = [slice(None)] * a.ndim
    i10[off + control] = 1
    i11 = list(i10)
    i10[off + target] = 0
    i11[off + target] = 1
    out = a.copy()
    out[tuple(i10)] = a[tuple(i11)]
    out[tuple(i11)] = a[tuple(i10)]
    return out.reshape(amps.shape)


def apply_swap(amps, n: int, q1: int, q2: int) -> np.ndarray:
    if q1 == q2:
        raise SimError("swap targets must differ")
    a, off = _bit_axes(amps, n)
    out = a.swapaxes(off + q1, off + q2).copy()
    return out.reshape(amps.shape)


def apply_diag(amps, diag) -> np.ndarray:
    """Multiply by a diagonal operator given as its (batchable) diagonal."""
    return amps * diag


def apply_diag_subregister(amps, n: int, start: int, size: int, diag) -> np.ndarray:
    """Apply a diagonal operator on the contiguous qubits [start, start+size).

    ``diag`` has shape (..., 2**size); leading axes broadcast against the
    batch axes of ``amps``.
    """
    lead = amps.shape[:-1]
    a = amps.reshape(lead + (2**start, 2**size, 2 ** (n - start - size)))
    d = np.asarray(diag)
    d = d.reshape(d.shape[:-1] + (1, 2**size, 1))
    return (a * d).reshape(amps.shape)


def apply_qft(amps, n: int, start: int = 0, size: int | None = None,
              inverse: bool = False) -> np.ndarray:
    """QFT on a contiguous qubit range.

    Forward transform: |j> -> 2^(-r/2) sum_m exp(+2 pi i j m / 2^r) |m>, i.e.
    momentum-space amplitudes under the FFT index map are carried to real-space
    grid samples.
    """
    size = n if size is None else size
    lead = amps.shape[:-1]
    a = amps.reshape(lead + (2**start, 2**size, 2 ** (n - start - size)))
    axis = len(lead) + 1
    if inverse:
        out = np.fft.fft(a, axis=axis) / np.sqrt(2**size)
    else:
        out = np.fft.ifft(a, axis=axis) * np.sqrt(2**size)
    return out.reshape(amps.shape)


def apply_gate(state: Statevector, gate: str, targets, angle=None, diag=None) -> Statevector:
    """Generic single-gate entry point on a Statevector.

    gate: one of 'rx', 'ry', 'rz' (uses ``angle``), 'cnot', 'swap',
    'diag' (uses ``diag``, a length-2**n phase vector).
    """
    targets = [targets] if np.isscalar(targets) else list(targets)
    if len(set(targets)) != len(targets):
        raise SimError("target qubits must be distinct")
    n, amps = state.n_qubits, state.amps
    g = gate.lower()
    if g in ("rx", "ry", "rz"):
        out = apply_rotation(amps, n, targets[0], g[1], angle)
    elif g == "cnot":
        out = apply_cnot(amps, n, targets[0], targets[1])
    elif g == "swap":
        out = apply_swap(amps, n, targets[0], targets[1])
    elif g == "diag":
        out = apply_diag(amps, np.asarray(diag))
    else:
        raise SimError(f"unknown gate {gate!r}")
    return Statevector(n, out)


def fidelity(a: Statevector, b: Statevector) -> float:
    """Squared overlap |<a|b>|^2 of two equally sized states."""
    if a.n_qubits != b.n_qubits:
        raise SimError("fidelity requires equal qubit counts")
    return float(np.abs(np.vdot(a.amps, b.amps)) ** 2)
