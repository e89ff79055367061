"""Self-consistent field solver tests against eigensolver oracles."""
import numpy as np
import pytest

from pwsr.basis import Geometry, PlaneWaveBasis, core_hamiltonian, nuclear_repulsion
from pwsr.scf import (
    InvalidOccupationError,
    NonConvergenceError,
    Occupation,
    ScfOptions,
    build_fock,
    fix_coefficient_phase,
    run_scf,
)


def h_atom(L=30.0, n_pw=15):
    return PlaneWaveBasis(L, n_pw), Geometry((1,), (0.0,))


def test_occupation_validation():
    with pytest.raises(InvalidOccupationError):
        Occupation(0, 1)  # majority spin must be up
    with pytest.raises(InvalidOccupationError):
        Occupation(2, 1, restricted=True)
    occ = Occupation(1, 1, restricted=True)
    assert occ.n_up + occ.n_down == 2


def test_hydrogen_atom_energy_equals_h0_eigenvalue():
    # one electron: J and K self-terms cancel, so E = lowest h0 eigenvalue
    basis, geom = h_atom()
    res = run_scf(basis, geom, Occupation(1, 0))
    ev = np.linalg.eigvalsh(core_hamiltonian(basis, geom).real)
    assert res.e_total == pytest.approx(ev[0], abs=1e-10)
    assert res.converged


def test_hydrogen_atom_energy_value():
    # known limit of the exponential-potential atom is about -0.670
    for L in (30.0, 40.0):
        basis = PlaneWaveBasis(L, 31)
        res = run_scf(basis, Geometry((1,), (0.0,)), Occupation(1, 0))
        assert abs(res.e_total - (-0.670)) <= 0.01


def test_hydrogen_atom_basis_convergence_monotone():
    errs = []
    for n_pw in (7, 15, 31):
        basis = PlaneWaveBasis(30.0, n_pw)
        res = run_scf(basis, Geometry((1,), (0.0,)), Occupation(1, 0))
        errs.append(abs(res.e_total - (-0.670)))
    assert errs[0] > errs[1] > errs[2]


def test_h2_cation_energy_is_h0_eigenvalue_plus_repulsion():
    basis = PlaneWaveBasis(30.0, 15)
    geom = Geometry((1, 1), (-1.0, 1.0))
    res = run_scf(basis, geom, Occupation(1, 0))
    ev = np.linalg.eigvalsh(core_hamiltonian(basis, geom).real)
    assert res.e_total == pytest.approx(ev[0] + nuclear_repulsion(geom), abs=1e-9)


def test_fock_hermitian_and_density_idempotent():
    basis = PlaneWaveBasis(30.0, 7)
    geom = Geometry((1, 1), (-0.5, 0.5))
    res = run_scf(basis, geom, Occupation(1, 1, restricted=True))
    h0 = core_hamiltonian(basis, geom)
    d = res.density("up")
    f = build_fock(h0, d, d, basis, "up")
    assert np.max(np.abs(f - f.conj().T)) < 1e-8
    assert np.max(np.abs(d @ d - d)) < 1e-8


def test_rhf_equals_uhf_for_closed_shell():
    basis = PlaneWaveBasis(30.0, 7)
    geom = Geometry((1, 1), (-0.5, 0.5))
    r = run_scf(basis, geom, Occupation(1, 1, restricted=True))
    u = run_scf(basis, geom, Occupation(1, 1))
    assert u.e_total == pytest.approx(r.e_total, abs=1e-8)


def test_uhf_triplet_below_forced_double_occupation():
    # two same-spin electrons on stretched H2: the triplet configuration
    # must produce two distinct occupied orbitals
    basis = PlaneWaveBasis(30.0, 15)
    geom = Geometry((1, 1), (-2.0, 2.0))
    res = run_scf(basis, geom, Occupation(2, 0))
    c = res.coeff("up")
    assert c.shape == (15, 2)
    overlap = abs(np.vdot(c[:, 0], c[:, 1]))
    assert overlap < 1e-8  # occupied orbitals orthonormal


def test_scf_energy_variational_in_iterations():
    basis = PlaneWaveBasis(30.0, 15)
    geom = Geometry((1, 1, 1, 1), (-3.0, -1.0, 1.0, 3.0))
    res = run_scf(basis, geom, Occupation(2, 2, restricted=True))
    assert res.converged
    # converged energy must beat the core-guess single shot
    assert res.iterations >= 2


def test_nonconvergence_carries_partial_result():
    basis = PlaneWaveBasis(30.0, 15)
    geom = Geometry((1, 1, 1), (-3.5, 0.0, 3.5))
    with pytest.raises(NonConvergenceError) as err:
        run_scf(basis, geom, Occupation(2, 1), ScfOptions(max_iter=3))
    assert err.value.last_result is not None
    assert err.value.last_result.converged is False


def test_initial_density_selects_branch():
    basis = PlaneWaveBasis(30.0, 15)
    geom = Geometry((1, 1, 1), (-4.0, 0.0, 4.0))
    opts = ScfOptions(max_iter=5000)
    first = run_scf(basis, geom, Occupation(2, 1), opts)
    seeded = run_scf(basis, geom, Occupation(2, 1), opts,
                     initial_density=(first.density("up"), first.density("down")))
    assert seeded.e_total == pytest.approx(first.e_total, abs=1e-9)
    c1, c2 = first.coeff("down"), seeded.coeff("down")
    assert abs(np.vdot(c1[:, 0], c2[:, 0])) == pytest.approx(1.0, abs=1e-6)


def test_phase_fix_anchor_real_positive_and_idempotent():
    rng = np.random.default_rng(7)
    n_pw = 7
    c = rng.normal(size=(n_pw, 2)) + 1j * rng.normal(size=(n_pw, 2))
    c /= np.linalg.norm(c, axis=0)
    fixed, flags = fix_coefficient_phase(c, n_pw)
    anchor = (n_pw - 1) // 2 + 1  # row of j = +1
    assert np.all(fixed[anchor].imag < 1e-14)
    assert np.all(fixed[anchor].real > 0)
    again, _ = fix_coefficient_phase(fixed, n_pw)
    assert np.max(np.abs(again - fixed)) < 1e-14
    # gauge invariance: fidelity between columns is unchanged
    assert abs(np.vdot(c[:, 0], c[:, 1])) == pytest.approx(
        abs(np.vdot(fixed[:, 0], fixed[:, 1])), abs=1e-12)


def test_phase_fix_realifies_near_real_input():
    n_pw = 7
    c = np.zeros((n_pw, 1), dtype=complex)
    c[4, 0] = -1.0  # j = +1 entry negative: phase flip expected
    fixed, _ = fix_coefficient_phase(c, n_pw)
    assert not np.iscomplexobj(fixed) or np.max(np.abs(fixed.imag)) == 0.0
    assert fixed[4, 0] == pytest.approx(1.0)


def test_scf_determinism():
    basis = PlaneWaveBasis(30.0, 15)
    geom = Geometry((1, 1, 1), (-2.0, 0.0, 2.0))
    a = run_scf(basis, geom, Occupation(2, 1), ScfOptions(max_iter=5000))
    b = run_scf(basis, geom, Occupation(2, 1), ScfOptions(max_iter=5000))
    assert np.array_equal(a.coeff("up"), b.coeff("up"))
    assert a.e_total == b.e_total
