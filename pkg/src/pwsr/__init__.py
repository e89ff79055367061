"""Resolution enhancement of plane-wave molecular wavefunctions with trained
parameterized unitaries on an exact statevector simulator."""

from .basis import (
    Geometry,
    PlaneWaveBasis,
    core_hamiltonian,
    nuclear_repulsion,
    periodic_v_exp,
    v_exp,
    v_exp_fourier,
)
from .circuits import AnsatzConfig, SampleData, interpolate_linear, u_init, u_shift
from .dataset import (
    CASE_I,
    CASE_II,
    CaseConfig,
    Sample,
    build_training_set,
    build_validation_set,
    h_chain,
    load_wfset,
    save_wfset,
)
from .scf import Occupation, ScfOptions, ScfResult, fix_orbital_phase, run_scf
from .sim import Statevector, encode_amplitudes, decode_amplitudes, fidelity
from .training import (
    TrainConfig,
    TrainReport,
    batch_fidelities,
    cost,
    evaluate,
    gradient,
    load_model,
    predict,
    save_model,
    train,
)
from .twoelectron import (
    TwoElectronState,
    embed_on_grid,
    enhance_two_electron,
    energy_expectation,
    grid_momenta,
    product_fidelity_estimate,
    solve_two_electron,
    two_electron_fidelity,
    two_electron_hamiltonian,
)

__version__ = "0.1.0"
