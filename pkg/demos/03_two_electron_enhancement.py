"""Enhance an exactly-solved two-electron wavefunction with a trained model.

Solves the H2 singlet ground state by dense diagonalization in both the
small and the large plane-wave basis, then applies a trained one-particle
enhancement circuit to each electron register of the small-basis state and
measures how close the result gets to the large-basis truth, in fidelity
and in energy.

Expects a model trained by demos/02 or by `pwsr train`; trains a quick
one if none is found next to this script.
"""
import pathlib

from pwsr import (
    CASE_I, SampleData, TrainConfig, AnsatzConfig, build_training_set,
    enhance_two_electron, energy_expectation, grid_momenta, h_chain,
    load_model, save_model, solve_two_electron, train, two_electron_fidelity,
    two_electron_hamiltonian,
)

case = CASE_I
model_path = pathlib.Path(__file__).parent / "demo_model.json"
if model_path.exists():
    ansatz, theta, _ = load_model(model_path)
else:
    print("no cached model, training one (about a minute)...")
    config = TrainConfig(ansatz=AnsatzConfig.ansatz2(case.n_hr), init="zeros",
                         n_seeds=1, max_epochs=500)
    report = train(build_training_set(case), config, case)
    save_model(report, config, case, model_path)
    ansatz, theta = config.ansatz, report.final_theta
none = (AnsatzConfig.none(case.n_hr), [])

js = grid_momenta(case.n_hr)
print(f"{'R':>3} {'f_pad':>8} {'f_model':>8} {'dE_pad':>9} {'dE_model':>9}")
for r in (1.0, 2.0, 3.0, 4.0, 5.0, 6.0):
    geom = h_chain(2, r)
    lr, _ = solve_two_electron(case.basis_lr, geom, "singlet")
    hr, e_hr = solve_two_electron(case.basis_hr, geom, "singlet")
    h_grid = two_electron_hamiltonian(case.L, js, geom)
    sd = SampleData.from_geometry(geom, case.L, case.n_hr)
    row = []
    for model in (none, (ansatz, theta)):
        pred = enhance_two_electron(lr, model, sd, case)
        row.append((two_electron_fidelity(pred, hr),
                    energy_expectation(pred, h_grid) - e_hr))
    print(f"{r:3.0f} {row[0][0]:8.4f} {row[1][0]:8.4f} "
          f"{row[0][1]:+9.5f} {row[1][1]:+9.5f}")
