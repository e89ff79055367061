"""Generation, preprocessing, and persistence of low/high-resolution
wavefunction pair datasets.

Every sample pairs the coefficients of one occupied Hartree-Fock orbital (or
a normalized sum of two same-spin orbitals) computed in a small plane-wave
basis with the same orbital computed in the enlarged basis, both phase-fixed
so the coefficient at k = +2 pi/L is real and positive.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .basis import Geometry, PlaneWaveBasis
from .circuits import SampleData
from .scf import Occupation, ScfOptions, fix_coefficient_phase, run_scf

FORMAT_VERSION = 1

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class CaseConfig:
    """One resolution-enhancement setting: cell length and basis sizes."""

    label: str
    L: float
    n_pw_lr: int
    n_pw_hr: int
    n_lr: int
    n_hr: int

    @property
    def basis_lr(self) -> PlaneWaveBasis:
        return PlaneWaveBasis(self.L, self.n_pw_lr)

    @property
    def basis_hr(self) -> PlaneWaveBasis:
        return PlaneWaveBasis(self.L, self.n_pw_hr)

    @staticmethod
    def from_label(label: str) -> "CaseConfig":
        key = label.lower().removeprefix("case_").removeprefix("case")
        if key == "i":
            return CASE_I
        if key == "ii":
            return CASE_II
        raise ValueError(f"unknown case label {label!r}")


CASE_I = CaseConfig("case_i", 30.0, 7, 15, 3, 4)
CASE_II = CaseConfig("case_ii", 40.0, 15, 31, 4, 5)


@dataclass(frozen=True)
class Sample:
    """One LR/HR coefficient pair with its provenance."""

    sample_id: str
    species: str
    bond_length: float
    spin: str                      # 'up' or 'down'
    orbital: int | tuple[int, int]  # index, or a same-spin pair
    geometry: Geometry
    c_lr: np.ndarray               # ascending-j coefficients, unit norm
    c_hr: np.ndarray

    def sample_data(self, case: CaseConfig) -> SampleData:
        return SampleData.from_geometry(self.geometry, case.L, case.n_hr)


def h_chain(n_atoms: int, spacing: float) -> Geometry:
    """n_atoms hydrogens, equidistant, centered on x = 0."""
    pos = (np.arange(n_atoms) - (n_atoms - 1) / 2.0) * spacing
    return Geometry((1,) * n_atoms, tuple(pos))


def h2_dimer(gap: float, bond: float) -> Geometry:
    """Two H2 molecules (bond length ``bond``) whose nearest atoms are ``gap`` apart."""
    half = gap / 2.0
    return Geometry((1, 1, 1, 1), (-half - bond, -half, half, half + bond))


def _grid(start: float, stop: float, step: float = 0.0625) -> list[float]:
    count = int(round((stop - start) / step)) + 1
    return [start + i * step for i in range(count)]


@dataclass(frozen=True)
class SpeciesSpec:
    species: str
    occupation: Occupation
    orbitals: tuple[tuple[str, int], ...]      # (spin, orbital index)
    bond_lengths: tuple[float, ...]
    pair: tuple[str, tuple[int, int]] | None = None  # same-spin orbital pair
    geometry_factory: object = None            # callable R -> Geometry


def _spec(species, occ, orbitals, rs, pair=None, factory=None, n_atoms=None):
    factory = factory or (lambda r, n=n_atoms: h_chain(n, r))
    return SpeciesSpec(species, occ, tuple(orbitals), tuple(rs), pair, factory)


TRAINING_SPECS = (
    _spec("H2_singlet", Occupation(1, 1, restricted=True), [("up", 0)],
          [1.0, 2.0, 3.0, 4.0, 5.0, 6.0], n_atoms=2),
    _spec("H2_triplet", Occupation(2, 0), [("up", 0), ("up", 1)],
          [1.0, 2.0, 3.0, 4.0, 5.0, 6.0], pair=("up", (0, 1)), n_atoms=2),
    _spec("H3", Occupation(2, 1), [("up", 0), ("up", 1), ("down", 0)],
          [1.0, 2.0, 3.0, 4.0], pair=("up", (0, 1)), n_atoms=3),
    _spec("H4", Occupation(2, 2, restricted=True), [("up", 0), ("up", 1)],
          [1.0, 2.0, 3.0, 4.0], pair=("up", (0, 1)), n_atoms=4),
)


def validation_specs(h2h2_bond_lengths=(0.75, 1.5)) -> tuple[SpeciesSpec, ...]:
    specs = [
        _spec("H2_singlet", Occupation(1, 1, restricted=True), [("up", 0)],
              _grid(0.5, 6.0), n_atoms=2),
        _spec("H2_triplet", Occupation(2, 0), [("up", 0), ("up", 1)],
              _grid(0.5, 6.0), n_atoms=2),
        _spec("H3+_singlet", Occupation(1, 1, restricted=True), [("up", 0)],
              _grid(0.5, 4.0), n_atoms=3),
        _spec("H3+_triplet", Occupation(2, 0), [("up", 0), ("up", 1)],
              _grid(0.5, 4.0), n_atoms=3),
        _spec("H3", Occupation(2, 1), [("up", 0), ("up", 1), ("down", 0)],
              _grid(0.5, 4.0), n_atoms=3),
        _spec("H4", Occupation(2, 2, restricted=True), [("up", 0), ("up", 1)],
              _grid(0.5, 4.0), n_atoms=4),
    ]
    for bond in h2h2_bond_lengths:
        specs.append(_spec(
            f"H2-H2({bond:g})", Occupation(2, 2, restricted=True),
            [("up", 0), ("up", 1)], _grid(0.5, 4.0),
            factory=lambda r, b=bond: h2_dimer(r, b),
        ))
    specs += [
        _spec("H5+", Occupation(2, 2, restricted=True), [("up", 0), ("up", 1)],
              _grid(1.5, 3.0), n_atoms=5),
        _spec("H5", Occupation(3, 2),
              [("up", 0), ("up", 1), ("up", 2), ("down", 0), ("down", 1)],
              _grid(1.5, 3.0), n_atoms=5),
    ]
    return tuple(specs)


# Plain damped iteration: DIIS extrapolation can lock onto a symmetric saddle
# of the unrestricted problem at stretched geometries, which changes the
# dataset; the slow-but-safe path always reaches the mixing fixed point.
# stretched H5 chains need ~700 damped iterations
_SCF_OPTIONS = ScfOptions(max_iter=5000)


def _fixed_coeffs(res, basis: PlaneWaveBasis):
    """Phase-fixed occupied orbital coefficients keyed by spin."""
    out = {}
    for spin in ("up", "down"):
        c, _ = fix_coefficient_phase(res.coeff(spin), basis.n_pw, f"{spin} orbital")
        out[spin] = c
    return out


def _pad_density(res, basis_hr: PlaneWaveBasis):
    """Embed converged LR density matrices in the HR index range (central
    block; same signed momenta). Used to seed the HR run so both resolutions
    converge to the same self-consistent branch."""
    off = (basis_hr.n_pw - res.basis.n_pw) // 2
    size = res.basis.n_pw
    padded = []
    for spin in ("up", "down"):
        d = res.density(spin)
        big = np.zeros((basis_hr.n_pw, basis_hr.n_pw), dtype=d.dtype)
        big[off:off + size, off:off + size] = d
        padded.append(big)
    return tuple(padded)


def align_phase(coeffs: np.ndarray, n_pw: int) -> np.ndarray:
    """Anchor convention for a single coefficient vector (idempotent)."""
    fixed, _ = fix_coefficient_phase(coeffs[:, None], n_pw, "sample")
    return fixed[:, 0]


def align_pair_phases(samples: list[Sample], case: CaseConfig) -> list[Sample]:
    """Re-apply the anchor convention to the LR and HR members of every sample."""
    out = []
    for s in samples:
        out.append(replace(
            s,
            c_lr=align_phase(s.c_lr, case.n_pw_lr),
            c_hr=align_phase(s.c_hr, case.n_pw_hr),
        ))
    return out


def _build_samples(case: CaseConfig, specs) -> list[Sample]:
    samples = []
    for spec in specs:
        for r in spec.bond_lengths:
            geom = spec.geometry_factory(r)
            res_lr = run_scf(case.basis_lr, geom, spec.occupation, _SCF_OPTIONS)
            res_hr = run_scf(case.basis_hr, geom, spec.occupation, _SCF_OPTIONS,
                             initial_density=_pad_density(res_lr, case.basis_hr))
            lr = _fixed_coeffs(res_lr, case.basis_lr)
            hr = _fixed_coeffs(res_hr, case.basis_hr)
            for spin, mu in spec.orbitals:
                samples.append(Sample(
                    sample_id=f"{spec.species},R={r:g},{spin},{mu}",
                    species=spec.species, bond_length=r, spin=spin, orbital=mu,
                    geometry=geom,
                    c_lr=lr[spin][:, mu].copy(), c_hr=hr[spin][:, mu].copy(),
                ))
            if spec.pair is not None:
                spin, (m1, m2) = spec.pair
                c_lr = (lr[spin][:, m1] + lr[spin][:, m2]) / _SQRT2
                c_hr = (hr[spin][:, m1] + hr[spin][:, m2]) / _SQRT2
                samples.append(Sample(
                    sample_id=f"{spec.species},R={r:g},{spin},pair{m1}{m2}",
                    species=spec.species, bond_length=r, spin=spin,
                    orbital=(m1, m2), geometry=geom, c_lr=c_lr, c_hr=c_hr,
                ))
    return align_pair_phases(samples, case)


def build_training_set(case: CaseConfig) -> list[Sample]:
    """The 52-sample training set: 38 occupied orbitals plus 14 orbital pairs."""
    return _build_samples(case, TRAINING_SPECS)


def build_validation_set(case: CaseConfig, h2h2_bond_lengths=(0.75, 1.5)) -> list[Sample]:
    return _build_samples(case, validation_specs(h2h2_bond_lengths))


# --- persistence --------------------------------------------------------------

def _vec_to_json(v: np.ndarray):
    return [[float(np.real(x)), float(np.imag(x))] for x in v]


def _vec_from_json(pairs) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs])


def save_wfset(samples: list[Sample], case: CaseConfig, split: str, path) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "case": {
            "label": case.label, "L": case.L,
            "n_pw_lr": case.n_pw_lr, "n_pw_hr": case.n_pw_hr,
            "n_lr": case.n_lr, "n_hr": case.n_hr,
        },
        "split": split,
        "samples": [
            {
                "id": s.sample_id,
                "species": s.species,
                "R": s.bond_length,
                "spin": s.spin,
                "orbital": list(s.orbital) if isinstance(s.orbital, tuple) else s.orbital,
                "geometry": {
                    "charges": list(s.geometry.charges),
                    "positions": list(s.geometry.positions),
                },
                "c_lr": _vec_to_json(s.c_lr),
                "c_hr": _vec_to_json(s.c_hr),
            }
            for s in samples
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_wfset(path) -> tuple[list[Sample], CaseConfig, str]:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported wfset format version in {path}")
    c = doc["case"]
    case = CaseConfig(c["label"], c["L"], c["n_pw_lr"], c["n_pw_hr"], c["n_lr"], c["n_hr"])
    samples = []
    for rec in doc["samples"]:
        orb = rec["orbital"]
        samples.append(Sample(
            sample_id=rec["id"], species=rec["species"], bond_length=rec["R"],
            spin=rec["spin"], orbital=tuple(orb) if isinstance(orb, list) else orb,
            geometry=Geometry(tuple(rec["geometry"]["charges"]),
                              tuple(rec["geometry"]["positions"])),
            c_lr=_vec_from_json(rec["c_lr"]), c_hr=_vec_from_json(rec["c_hr"]),
        ))
    return samples, case, doc.get("split", "")
