"""Fidelity-based training of the enhancement circuits.

The cost is the negative mean squared overlap between predicted and target
high-resolution states. Gradients come from a reverse (adjoint) sweep through
the circuit, which is exact for statevector simulation; central differences
are kept as an independent cross-check. The whole dataset is pushed through
the circuit as one (N_samples, 2**n) batch.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import circuits, sim
from .circuits import ANSATZ1, ANSATZ2, NO_ANSATZ, AnsatzConfig
from .dataset import CaseConfig, Sample
from .sim import Statevector


class TrainingError(Exception):
    pass


class NonFiniteError(TrainingError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    ansatz: AnsatzConfig
    init: str = "zeros"            # 'zeros' or 'uniform'
    init_scale: float = 0.1
    seed: int = 0
    n_seeds: int = 1
    learning_rate: float = 0.01
    betas: tuple[float, float] = (0.9, 0.999)
    epsilon: float = 1e-8
    max_epochs: int = 2000
    plateau_tol: float = 1e-7      # relative best-loss change
    plateau_window: int = 50
    gradient_method: str = "adjoint"

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")


@dataclass
class TrainReport:
    final_theta: np.ndarray
    loss_history: list[float]
    per_sample_fidelities: np.ndarray
    average_fidelity: float
    seed_used: int
    epochs_run: int


# --- batch assembly -----------------------------------------------------------

def padded_input(sample: Sample, case: CaseConfig) -> np.ndarray:
    """LR coefficients zero-padded onto the HR index range, with the
    center-of-mass phase applied (the combined effect of the initialization
    and shift operations)."""
    state = sim.encode_amplitudes(sample.c_lr, case.n_hr)
    return state.amps * circuits.shift_phases(case.L, case.n_hr, sample.geometry.d_cm)


def target_state(sample: Sample, case: CaseConfig) -> np.ndarray:
    return sim.encode_amplitudes(sample.c_hr, case.n_hr).amps


def batch_arrays(samples: list[Sample], case: CaseConfig, ansatz: AnsatzConfig):
    """Input batch, target batch, and per-sample circuit context."""
    if not samples:
        raise TrainingError("empty dataset")
    psi0 = np.stack([padded_input(s, case) for s in samples])
    targets = np.stack([target_state(s, case) for s in samples])
    ctx = {}
    if ansatz.family == ANSATZ2:
        ctx["potential"] = np.stack(
            [s.sample_data(case).potential_grid for s in samples]
        )
    return psi0, targets, ctx


# --- prediction and cost --------------------------------------------------------

def predict(sample: Sample, theta, ansatz: AnsatzConfig, case: CaseConfig) -> Statevector:
    """Full pipeline for one sample: encode, initialize, shift, ansatz."""
    lr = sim.encode_amplitudes(sample.c_lr, case.n_lr)
    state = circuits.u_init(circuits.prepend_ancilla(lr))
    state = circuits.u_shift(state, sample.geometry.d_cm, case.L)
    if ansatz.family == ANSATZ1:
        return circuits.apply_ansatz1(state, theta, ansatz)
    if ansatz.family == ANSATZ2:
        return circuits.apply_ansatz2(state, theta, sample.sample_data(case), ansatz)
    return state


def _forward(ops, psi0, n, theta, ctx):
    amps = psi0
    for op in ops:
        amps = op.apply(amps, n, theta, ctx)
    return amps


def batch_fidelities(samples, theta, ansatz: AnsatzConfig, case: CaseConfig) -> np.ndarray:
    psi0, targets, ctx = batch_arrays(samples, case, ansatz)
    theta = np.asarray(theta, dtype=float)
    psi = _forward(circuits.ansatz_ops(ansatz), psi0, case.n_hr, theta, ctx)
    return np.abs(np.sum(targets.conj() * psi, axis=-1)) ** 2


def cost(samples, theta, ansatz: AnsatzConfig, case: CaseConfig) -> float:
    """Negative mean fidelity over the dataset; in [-1, 0]."""
    return -float(np.mean(batch_fidelities(samples, theta, ansatz, case)))


def _cost_and_grad(ops, psi0, targets, n, theta, ctx, n_params):
    psi = _forward(ops, psi0, n, theta, ctx)
    overlaps = np.sum(targets.conj() * psi, axis=-1)
    batch = psi0.shape[0]
    loss = -float(np.mean(np.abs(overlaps) ** 2))
    grad = np.zeros(n_params)
    ket, bra = psi, targets
    for op in reversed(ops):
        ket = op.apply_dagger(ket, n, theta, ctx)
        if op.pidx is not None:
            dket = op.apply_deriv(ket, n, theta, ctx)
            deriv = np.sum(bra.conj() * dket, axis=-1)
            grad[op.pidx] -= 2.0 / batch * float(
                np.sum(np.real(np.conj(overlaps) * deriv))
            )
        bra = op.apply_dagger(bra, n, theta, ctx)
    return loss, grad


def gradient(samples, theta, ansatz: AnsatzConfig, case: CaseConfig,
             method: str = "adjoint", fd_step: float = 1e-5) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if method == "adjoint":
        psi0, targets, ctx = batch_arrays(samples, case, ansatz)
        _, grad = _cost_and_grad(circuits.ansatz_ops(ansatz), psi0, targets,
                                 case.n_hr, theta, ctx, ansatz.n_params)
        return grad
    if method == "central_difference":
        grad = np.zeros(ansatz.n_params)
        for i in range(ansatz.n_params):
            tp, tm = theta.copy(), theta.copy()
            tp[i] += fd_step
            tm[i] -= fd_step
            grad[i] = (cost(samples, tp, ansatz, case)
                       - cost(samples, tm, ansatz, case)) / (2.0 * fd_step)
        return grad
    raise TrainingError(f"unknown gradient method {method!r}")


# --- optimization ----------------------------------------------------------------

def _initial_theta(config: TrainConfig, rng: np.random.Generator) -> np.ndarray:
    n = config.ansatz.n_params
    if config.init == "zeros":
        return np.zeros(n)
    if config.init == "uniform":
        return rng.uniform(-config.init_scale, config.init_scale, size=n)
    raise TrainingError(f"unknown init {config.init!r}")


def _adam_run(ops, psi0, targets, n, ctx, theta, config: TrainConfig):
    beta1, beta2 = config.betas
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    best_loss = np.inf
    best_theta = theta.copy()
    history = []
    window_anchor = np.inf
    n_params = config.ansatz.n_params
    for epoch in range(1, config.max_epochs + 1):
        loss, grad = _cost_and_grad(ops, psi0, targets, n, theta, ctx, n_params)
        if not (np.isfinite(loss) and np.all(np.isfinite(grad))):
            raise NonFiniteError(
                f"non-finite loss/gradient at epoch {epoch}: loss={loss!r}"
            )
        history.append(loss)
        if loss < best_loss:
            best_loss = loss
            best_theta = theta.copy()
        m = beta1 * m + (1.0 - beta1) * grad
        v = beta2 * v + (1.0 - beta2) * grad**2
        m_hat = m / (1.0 - beta1**epoch)
        v_hat = v / (1.0 - beta2**epoch)
        theta = theta - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon)
        if epoch % config.plateau_window == 0:
            if abs(window_anchor - best_loss) < config.plateau_tol * max(1.0, abs(best_loss)):
                break
            window_anchor = best_loss
    return best_theta, best_loss, history


def train(samples: list[Sample], config: TrainConfig, case: CaseConfig) -> TrainReport:
    """Adam optimization of the mean-fidelity cost; multi-seed with best-loss
    selection when ``config.n_seeds`` > 1."""
    ansatz = config.ansatz
    psi0, targets, ctx = batch_arrays(samples, case, ansatz)
    ops = circuits.ansatz_ops(ansatz)
    best = None
    for trial in range(config.n_seeds):
        seed = config.seed + trial
        rng = np.random.default_rng(seed)
        theta0 = _initial_theta(config, rng)
        theta, loss, history = _adam_run(ops, psi0, targets, case.n_hr, ctx,
                                         theta0, config)
        if best is None or loss < best[1]:
            best = (theta, loss, history, seed)
    theta, loss, history, seed = best
    fids = batch_fidelities(samples, theta, ansatz, case)
    return TrainReport(
        final_theta=theta,
        loss_history=history,
        per_sample_fidelities=fids,
        average_fidelity=float(np.mean(fids)),
        seed_used=seed,
        epochs_run=len(history),
    )


# --- evaluation -------------------------------------------------------------------

def evaluate(samples: list[Sample], case: CaseConfig,
             models: dict[str, tuple[AnsatzConfig, np.ndarray]] | None = None,
             group_by: str = "species"):
    """Per-sample fidelity table plus grouped averages.

    ``models`` maps a column name to (ansatz config, trained parameters).
    The no-ansatz and linear-interpolation baselines are always included.
    """
    models = models or {}
    rows = []
    columns = ["f_noansatz", "f_interp"] + [f"f_{name}" for name in models]
    per_model_fids = {
        name: batch_fidelities(samples, theta, ansatz, case)
        for name, (ansatz, theta) in models.items()
    }
    for i, s in enumerate(samples):
        target = Statevector(case.n_hr, target_state(s, case))
        rec = {
            "species": s.species, "R": s.bond_length, "spin": s.spin,
            "orbital": s.orbital,
            "f_noansatz": sim.fidelity(
                Statevector(case.n_hr, padded_input(s, case)), target),
            "f_interp": sim.fidelity(
                circuits.interpolate_linear(s.c_lr, case.n_hr), target),
        }
        for name, fids in per_model_fids.items():
            rec[f"f_{name}"] = float(fids[i])
        rows.append(rec)
    groups: dict[str, dict[str, float]] = {}
    for key in sorted({str(r[group_by]) for r in rows}):
        members = [r for r in rows if str(r[group_by]) == key]
        groups[key] = {
            col: float(np.mean([r[col] for r in members])) for col in columns
        }
    return rows, groups


# --- model persistence --------------------------------------------------------------

def save_model(report: TrainReport, config: TrainConfig, case: CaseConfig, path) -> None:
    doc = {
        "format_version": 1,
        "case": case.label,
        "ansatz": {
            "family": config.ansatz.family,
            "n_qubits": config.ansatz.n_qubits,
            "n_layers": config.ansatz.n_layers,
            "n_sublayers": config.ansatz.n_sublayers,
        },
        "train": {
            "init": config.init, "init_scale": config.init_scale,
            "seed": config.seed, "n_seeds": config.n_seeds,
            "learning_rate": config.learning_rate,
            "betas": list(config.betas), "epsilon": config.epsilon,
            "max_epochs": config.max_epochs,
        },
        "theta": [float(x) for x in report.final_theta],
        "average_fidelity": report.average_fidelity,
        "seed_used": report.seed_used,
        "epochs_run": report.epochs_run,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path) -> tuple[AnsatzConfig, np.ndarray, dict]:
    with open(path) as fh:
        doc = json.load(fh)
    a = doc["ansatz"]
    ansatz = AnsatzConfig(a["family"], a["n_qubits"], a["n_layers"], a["n_sublayers"])
    return ansatz, np.asarray(doc["theta"], dtype=float), doc
