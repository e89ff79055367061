"""Hartree-Fock in the plane-wave basis (restricted and unrestricted).

The Fock matrix is

    F^s = h0 + J[D_up + D_down] - K[D^s],

where the Hartree (J) and exchange (K) contractions exploit momentum
conservation: both couple only matrix elements on the same diagonal band
q = j - j' of the integer wavevector grid.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .basis import (
    Geometry,
    PlaneWaveBasis,
    core_hamiltonian,
    nuclear_repulsion,
    v_exp_fourier,
)

log = logging.getLogger(__name__)

#: Row index of the phase anchor wavevector k = +2 pi / L in ascending-j order.
def _anchor_row(n_pw: int) -> int:
    return (n_pw - 1) // 2 + 1


class ScfError(Exception):
    pass


class NonConvergenceError(ScfError):
    def __init__(self, message, last_result=None):
        super().__init__(message)
        self.last_result = last_result


class InvalidOccupationError(ScfError):
    pass


@dataclass(frozen=True)
class Occupation:
    """Number of occupied spatial orbitals per spin channel."""

    n_up: int
    n_down: int
    restricted: bool = False

    def __post_init__(self):
        if self.n_down < 0 or self.n_up < self.n_down:
            raise InvalidOccupationError("need n_up >= n_down >= 0")
        if self.n_up + self.n_down < 1:
            raise InvalidOccupationError("need at least one electron")
        if self.restricted and self.n_up != self.n_down:
            raise InvalidOccupationError("restricted requires n_up == n_down")


@dataclass(frozen=True)
class ScfOptions:
    mixing: float = 0.3
    diis: bool = False
    diis_depth: int = 8
    diis_start_error: float = 0.05
    max_iter: int = 500
    density_tol: float = 1e-10
    energy_tol: float = 1e-12
    degeneracy_tol: float = 1e-9


@dataclass(frozen=True)
class ScfResult:
    """Converged orbitals: per-spin occupied coefficients and eigenvalues."""

    basis: PlaneWaveBasis
    geometry: Geometry
    occupation: Occupation
    coeffs: tuple[np.ndarray, np.ndarray]  # (C_up, C_down), n_pw x n_occ each
    eigenvalues: tuple[np.ndarray, np.ndarray]
    e_total: float
    converged: bool
    iterations: int

    def coeff(self, spin: str) -> np.ndarray:
        return self.coeffs[0 if spin == "up" else 1]

    def density(self, spin: str) -> np.ndarray:
        c = self.coeff(spin)
        return c @ c.conj().T


def build_fock(h0, density_up, density_down, basis: PlaneWaveBasis, spin: str):
    """Fock matrix for one spin channel from the current spin densities."""
    n = h0.shape[0]
    for d in (density_up, density_down):
        if d.shape != (n, n):
            raise ValueError("density matrix dimension mismatch")
    d_tot = density_up + density_down
    d_spin = density_up if spin == "up" else density_down
    k = basis.k_values
    vt = v_exp_fourier(basis.L, k[:, None] - k[None, :])  # vtilde(k_a - k_l)

    f = h0.astype(np.result_type(h0, d_tot)).copy()
    for q in range(-(n - 1), n):
        rows = np.arange(max(0, q), n + min(0, q))
        cols = rows - q
        vq = v_exp_fourier(basis.L, 2.0 * np.pi * q / basis.L)
        band_tot = d_tot[rows, cols].sum()
        # Hartree: same value along the whole band.
        f[rows, cols] += vq * band_tot
        # Exchange: transfer between row index and the density band.
        f[rows, cols] -= vt[np.ix_(rows, rows)] @ d_spin[rows, cols]
    return f


def _canonical_order(eps, c, anchor_row, tol):
    """Deterministically order eigenvector columns inside degenerate groups.

    Within a group of (numerically) equal eigenvalues, columns are sorted by
    descending anchor magnitude so datasets are reproducible across platforms.
    """
    n = len(eps)
    i = 0
    c = c.copy()
    while i < n:
        j = i + 1
        while j < n and eps[j] - eps[i] < tol:
            j += 1
        if j - i > 1:
            block = c[:, i:j]
            order = np.argsort(-np.abs(block[anchor_row, :]), kind="stable")
            c[:, i:j] = block[:, order]
        i = j
    return c


def _density(c, n_occ):
    if n_occ == 0:
        return np.zeros((c.shape[0], c.shape[0]), dtype=c.dtype)
    occ = c[:, :n_occ]
    return occ @ occ.conj().T


def _diis_extrapolate(focks, errors):
    m = len(focks)
    b = np.empty((m + 1, m + 1))
    b[-1, :] = -1.0
    b[:, -1] = -1.0
    b[-1, -1] = 0.0
    for i in range(m):
        for j in range(m):
            b[i, j] = np.real(np.vdot(errors[i], errors[j]))
    rhs = np.zeros(m + 1)
    rhs[-1] = -1.0
    coef = np.linalg.lstsq(b, rhs, rcond=None)[0][:m]
    f_up = sum(c * f[0] for c, f in zip(coef, focks))
    f_dn = sum(c * f[1] for c, f in zip(coef, focks))
    return f_up, f_dn


def run_scf(
    basis: PlaneWaveBasis,
    geom: Geometry,
    occupation: Occupation,
    options: ScfOptions | None = None,
    initial_density: tuple[np.ndarray, np.ndarray] | None = None,
) -> ScfResult:
    """Iterate the Fock equations to self-consistency.

    ``initial_density`` replaces the default core guess; it selects a
    particular self-consistent branch when several coexist (broken-symmetry
    unrestricted solutions of symmetric molecules).

    Raises NonConvergenceError after ``options.max_iter`` iterations; the
    partially converged result is attached to the exception.
    """
    opt = options or ScfOptions()
    occ = occupation
    n = basis.n_pw

    h0 = core_hamiltonian(basis, geom)
    if np.max(np.abs(h0.imag)) < 1e-12:
        h0 = np.ascontiguousarray(h0.real)  # symmetric geometry: keep it real
    e_nn = nuclear_repulsion(geom)
    anchor = _anchor_row(n)

    def solve(f):
        eps, c = np.linalg.eigh(f)
        return eps, _canonical_order(eps, c, anchor, opt.degeneracy_tol)

    eps0, c0 = solve(h0)
    if initial_density is not None:
        d_up, d_dn = (np.asarray(d) for d in initial_density)
        if not np.iscomplexobj(h0):
            if max(np.max(np.abs(d_up.imag)), np.max(np.abs(d_dn.imag))) < 1e-10:
                d_up, d_dn = d_up.real, d_dn.real
        if occ.restricted:
            d_dn = d_up
    else:
        d_up = _density(c0, occ.n_up)
        if occ.restricted:
            d_dn = d_up
        else:
            # Break spin symmetry: first step sees only the majority-spin density.
            d_dn = np.zeros_like(d_up)

    e_prev = None
    eps_up = eps_dn = eps0
    c_up = c_dn = c0
    focks, errors = [], []
    converged = False
    it = 0
    for it in range(1, opt.max_iter + 1):
        f_up = build_fock(h0, d_up, d_dn, basis, "up")
        f_dn = f_up if occ.restricted else build_fock(h0, d_up, d_dn, basis, "down")
        energy = 0.5 * (
            np.trace(d_up @ (h0 + f_up)) + np.trace(d_dn @ (h0 + f_dn))
        ).real + e_nn

        diis_active = False
        if opt.diis:
            err = np.concatenate(
                [(f_up @ d_up - d_up @ f_up).ravel(), (f_dn @ d_dn - d_dn @ f_dn).ravel()]
            )
            # Extrapolate only near self-consistency; early DIIS with a
            # symmetry-broken guess can bounce between branches.
            if np.max(np.abs(err)) < opt.diis_start_error:
                focks.append((f_up, f_dn))
                errors.append(err)
                if len(focks) > opt.diis_depth:
                    focks.pop(0)
                    errors.pop(0)
                if len(focks) >= 2:
                    f_up, f_dn = _diis_extrapolate(focks, errors)
                    diis_active = True

        eps_up, c_up = solve(f_up)
        if occ.restricted:
            eps_dn, c_dn = eps_up, c_up
        else:
            eps_dn, c_dn = solve(f_dn)

        new_up = _density(c_up, occ.n_up)
        new_dn = new_up if occ.restricted else _density(c_dn, occ.n_down)

        delta_d = max(np.max(np.abs(new_up - d_up)), np.max(np.abs(new_dn - d_dn)))
        delta_e = abs(energy - e_prev) if e_prev is not None else np.inf
        e_prev = energy
        if delta_d < opt.density_tol and delta_e < opt.energy_tol:
            converged = True
            d_up, d_dn = new_up, new_dn
            break

        if diis_active:
            d_up, d_dn = new_up, new_dn
        else:
            a = opt.mixing
            d_up = (1.0 - a) * d_up + a * new_up
            d_dn = d_up if occ.restricted else (1.0 - a) * d_dn + a * new_dn

    c_occ_up = c_up[:, : occ.n_up]
    c_occ_dn = c_occ_up[:, : occ.n_down] if occ.restricted else c_dn[:, : occ.n_down]
    result = ScfResult(
        basis=basis,
        geometry=geom,
        occupation=occ,
        coeffs=(c_occ_up, c_occ_dn),
        eigenvalues=(eps_up[: occ.n_up], eps_dn[: occ.n_down]),
        e_total=float(e_prev),
        converged=converged,
        iterations=it,
    )
    if not converged:
        raise NonConvergenceError(
            f"SCF did not converge in {opt.max_iter} iterations "
            f"(geometry {geom.charges} @ {geom.positions})",
            last_result=result,
        )
    return result


def fix_coefficient_phase(c: np.ndarray, n_pw: int, label: str = "orbital"):
    """Rotate each column's global phase so the k = +2 pi/L coefficient is real > 0.

    Falls back to the largest-magnitude positive-j coefficient when the anchor
    is degenerate (magnitude < 1e-12); the fallback is logged.
    """
    anchor = _anchor_row(n_pw)
    c = np.array(c, copy=True)
    fallbacks = []
    for mu in range(c.shape[1]):
        a = c[anchor, mu]
        if abs(a) < 1e-12:
            pos = c[anchor:, mu]
            row = anchor + int(np.argmax(np.abs(pos)))
            a = c[row, mu]
            fallbacks.append(mu)
            log.warning(
                "degenerate phase anchor for %s %d; falling back to row j=%+d",
                label, mu, row - (n_pw - 1) // 2,
            )
            if abs(a) < 1e-12:
                raise ScfError(f"no usable phase anchor for {label} {mu}")
        c[:, mu] *= np.conj(a) / abs(a)
    if np.iscomplexobj(c) and np.max(np.abs(c.imag)) < 1e-8:
        c = np.ascontiguousarray(c.real)
    return c, fallbacks


def fix_orbital_phase(result: ScfResult) -> ScfResult:
    """Apply the phase-anchor convention to every occupied orbital."""
    n = result.basis.n_pw
    c_up, _ = fix_coefficient_phase(result.coeff("up"), n, "spin-up orbital")
    if result.occupation.restricted:
        c_dn = c_up[:, : result.occupation.n_down]
    else:
        c_dn, _ = fix_coefficient_phase(result.coeff("down"), n, "spin-down orbital")
    return replace(result, coeffs=(c_up, c_dn))
