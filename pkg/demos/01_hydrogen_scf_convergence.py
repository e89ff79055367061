"""Hartree-Fock energy of a single hydrogen atom in a periodic cell.

Shows the basis-set convergence of the ground-state energy as the number of
plane waves grows, for two cell lengths. Runs in about a second.
"""
import numpy as np

from pwsr import Geometry, Occupation, PlaneWaveBasis, run_scf

geom = Geometry(charges=(1,), positions=(0.0,))
occ = Occupation(n_up=1, n_down=0)

for L in (30.0, 40.0):
    print(f"cell length L = {L:g}")
    previous = None
    for n_pw in (7, 15, 31, 63):
        res = run_scf(PlaneWaveBasis(L, n_pw), geom, occ)
        delta = "" if previous is None else f"  (dE = {res.e_total - previous:+.6f})"
        print(f"  N_pw = {n_pw:3d}   E = {res.e_total:+.6f} Ha{delta}")
        previous = res.e_total
    print()

# The orbital itself: evaluate |psi(x)|^2 on a real-space grid via the
# coefficient expansion and check it is peaked at the nucleus.
basis = PlaneWaveBasis(30.0, 31)
res = run_scf(basis, geom, occ)
c = res.coeff("up")[:, 0]
x = np.linspace(-15.0, 15.0, 601)
psi = (c[None, :] * np.exp(1j * np.outer(x, basis.k_values))).sum(axis=1)
psi /= np.sqrt(basis.L)
print(f"density maximum at x = {x[np.argmax(np.abs(psi) ** 2)]:+.3f} (nucleus at 0)")
