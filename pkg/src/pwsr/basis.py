"""Plane-wave basis, soft-exponential potentials, and Hamiltonian matrix elements.

Everything lives in a 1D periodic cell of length L (atomic units). Charged
particles interact through the exponential potential

    v_exp(x) = A exp(-kappa |x|),

a soft stand-in for the Coulomb interaction whose periodic Fourier
components have the closed form 2 A kappa / (L (kappa^2 + k^2)).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Amplitude of the exponential interaction (a.u.).
A_POTENTIAL = 1.071295
#: Inverse decay length of the exponential interaction (a.u.^-1).
KAPPA_POTENTIAL = 1.0 / 2.385345


def v_exp(x):
    """Exponential interaction A exp(-kappa |x|) on the infinite line."""
    return A_POTENTIAL * np.exp(-KAPPA_POTENTIAL * np.abs(x))


def v_exp_fourier(L, k):
    """Fourier components of v_exp over a cell of length L.

    Returns 2 A kappa / (L (kappa^2 + k^2)); strictly positive and even in k.
    """
    kk = np.asarray(k, dtype=float)
    out = 2.0 * A_POTENTIAL * KAPPA_POTENTIAL / (L * (KAPPA_POTENTIAL**2 + kk**2))
    return float(out) if out.ndim == 0 else out


def periodic_v_exp(x, L, rel_tol=1e-12):
    """v_exp summed over all lattice images x - m L.

    The image sum is truncated once an increment falls below ``rel_tol``
    relative to the running total.
    """
    y = np.mod(np.asarray(x, dtype=float), L)
    total = np.zeros_like(y)
    m = 0
    while True:
        inc = v_exp(y + m * L) + v_exp(y - (m + 1) * L)
        total = total + inc
        if np.max(inc) <= rel_tol * np.max(total):
            return total
        m += 1


@dataclass(frozen=True)
class PlaneWaveBasis:
    """Plane waves exp(i k_j x)/sqrt(L) with k_j = 2 pi j / L.

    The integer indices run over j = 0, +-1, ..., +-(n_pw - 1)/2, so n_pw
    must be odd. Arrays indexed by the basis use ascending j order
    (row i <-> j = i - j_max).
    """

    L: float
    n_pw: int

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError("cell length L must be positive")
        if self.n_pw < 3 or self.n_pw % 2 == 0:
            raise ValueError("n_pw must be odd and >= 3")

    @property
    def j_max(self) -> int:
        return (self.n_pw - 1) // 2

    @property
    def j_indices(self) -> np.ndarray:
        return np.arange(-self.j_max, self.j_max + 1)

    def k(self, j):
        """Wavevector 2 pi j / L for integer index j (scalar or array)."""
        return 2.0 * np.pi * np.asarray(j) / self.L

    @property
    def k_values(self) -> np.ndarray:
        return self.k(self.j_indices)

    def chi(self, j, x):
        """Basis function exp(i k_j x)/sqrt(L) at positions x."""
        return np.exp(1j * self.k(j) * np.asarray(x, dtype=float)) / np.sqrt(self.L)


@dataclass(frozen=True)
class Geometry:
    """Nuclear charges and positions of a 1D molecule."""

    charges: tuple[int, ...]
    positions: tuple[float, ...]

    def __post_init__(self):
        if len(self.charges) != len(self.positions):
            raise ValueError("charges and positions must have equal length")
        object.__setattr__(self, "charges", tuple(int(z) for z in self.charges))
        object.__setattr__(self, "positions", tuple(float(d) for d in self.positions))

    @property
    def n_nuclei(self) -> int:
        return len(self.charges)

    @property
    def d_cm(self) -> float:
        """Charge-weighted center of the nuclei (0 for an empty geometry)."""
        if not self.charges:
            return 0.0
        z = np.asarray(self.charges, dtype=float)
        d = np.asarray(self.positions, dtype=float)
        return float(np.dot(z, d) / np.sum(z))

    def shifted(self, delta: float) -> "Geometry":
        return Geometry(self.charges, tuple(d + delta for d in self.positions))


def parse_geometry_text(text: str) -> tuple[Geometry, float]:
    """Parse the plain-text geometry format: 'L=<float>' header, then 'Z d' lines."""
    L = None
    charges, positions = [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("L="):
            L = float(line[2:])
            continue
        z_str, d_str = line.split()
        charges.append(int(z_str))
        positions.append(float(d_str))
    if L is None:
        raise ValueError("geometry text is missing the 'L=<float>' header")
    return Geometry(tuple(charges), tuple(positions)), L


def format_geometry_text(geom: Geometry, L: float) -> str:
    lines = [f"L={L!r}"]
    lines += [f"{z} {d!r}" for z, d in zip(geom.charges, geom.positions)]
    return "\n".join(lines) + "\n"


def nuclear_repulsion(geom: Geometry) -> float:
    """Pairwise nucleus-nucleus energy sum_{I<J} Z_I Z_J v_exp(d_I - d_J)."""
    e = 0.0
    for i in range(geom.n_nuclei):
        for j in range(i + 1, geom.n_nuclei):
            e += geom.charges[i] * geom.charges[j] * v_exp(
                geom.positions[i] - geom.positions[j]
            )
    return float(e)


def one_body_hamiltonian(L, js, geom: Geometry) -> np.ndarray:
    """Kinetic + electron-nuclear matrix over plane waves with integer indices js.

    h[a, b] = delta_ab k_a^2/2 - sum_I Z_I exp(-i (k_a - k_b) d_I) vtilde(k_a - k_b)
    """
    js = np.asarray(js)
    k = 2.0 * np.pi * js / L
    h = np.diag(0.5 * k**2).astype(complex)
    dk = k[:, None] - k[None, :]
    vt = v_exp_fourier(L, dk)
    for z, d in zip(geom.charges, geom.positions):
        h -= z * np.exp(-1j * dk * d) * vt
    return h


def core_hamiltonian(basis: PlaneWaveBasis, geom: Geometry) -> np.ndarray:
    """One-electron Hamiltonian matrix (n_pw x n_pw), Hermitian."""
    return one_body_hamiltonian(basis.L, basis.j_indices, geom)


def coulomb_tensor_element(basis: PlaneWaveBasis, j: int, jp: int, l: int, lp: int) -> float:
    """Two-electron repulsion integral of four plane waves (chemist ordering).

    Nonzero only when the integer momenta balance, j + l == jp + lp, in which
    case the value is vtilde at the transfer k_l - k_lp. The conservation test
    is an exact integer comparison.
    """
    jm = basis.j_max
    for idx in (j, jp, l, lp):
        if abs(int(idx)) > jm:
            raise ValueError(f"plane-wave index {idx} outside basis (|j| <= {jm})")
    if j + l != jp + lp:
        return 0.0
    return v_exp_fourier(basis.L, basis.k(l) - basis.k(lp))


def potential_on_grid(L, geom: Geometry, n_qubits: int) -> np.ndarray:
    """Electron-nuclear potential sampled at x_m = m L / 2^n, m = 0..2^n - 1.

    Uses the lattice-periodicized v_exp so the samples are consistent with
    the Fourier components v_exp_fourier.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    x = np.arange(2**n_qubits) * (L / 2**n_qubits)
    v = np.zeros_like(x)
    for z, d in zip(geom.charges, geom.positions):
        v -= z * periodic_v_exp(x - d, L)
    return v
