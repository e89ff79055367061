"""Statevector kernels: index maps, gates, and the Fourier transform oracle."""
import numpy as np
import pytest

from pwsr.sim import (
    IndexOverflowError,
    NormalizationError,
    SimError,
    Statevector,
    apply_cnot,
    apply_diag_subregister,
    apply_gate,
    apply_qft,
    apply_rotation,
    apply_single,
    apply_swap,
    decode_amplitudes,
    encode_amplitudes,
    fidelity,
    index_to_momentum,
    momentum_index,
    rotation_matrix,
)


def random_state(n, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return a / np.linalg.norm(a)


def test_momentum_index_map():
    assert momentum_index(0, 3) == 0
    assert momentum_index(3, 3) == 3
    assert momentum_index(-1, 3) == 7
    assert momentum_index(-3, 3) == 5
    js = np.arange(-3, 4)
    assert np.array_equal(index_to_momentum(momentum_index(js, 3), 3), js)


def test_encode_decode_roundtrip():
    rng = np.random.default_rng(1)
    c = rng.normal(size=7) + 1j * rng.normal(size=7)
    c /= np.linalg.norm(c)
    state = encode_amplitudes(c, 3)
    assert state.amps[4] == 0  # Nyquist index stays empty
    back = decode_amplitudes(state, 7)
    assert back == pytest.approx(c, abs=1e-14)


def test_encode_rejects_oversized_and_unnormalized():
    with pytest.raises(IndexOverflowError):
        encode_amplitudes(np.ones(9) / 3.0, 3)  # j_max = 4 needs 4 qubits
    with pytest.raises(NormalizationError):
        encode_amplitudes(np.ones(7), 3)


def test_rotation_matrices_unitary_and_periodic():
    for axis in "xyz":
        m = rotation_matrix(axis, 0.731)
        assert np.allclose(m @ m.conj().T, np.eye(2), atol=1e-15)
    assert np.allclose(rotation_matrix("y", 2 * np.pi), -np.eye(2), atol=1e-15)


def test_apply_single_msb_convention():
    # qubit 0 is the MSB: flipping it with X = Ry(pi) up to phase moves
    # amplitude between index 0 and index 2**(n-1)
    n = 3
    a = np.zeros(8, dtype=complex)
    a[0] = 1.0
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    out = apply_single(a, n, 0, x)
    assert out[4] == 1.0
    out = apply_single(a, n, 2, x)  # LSB
    assert out[1] == 1.0


def test_cnot_truth_table():
    n = 2
    for b0 in (0, 1):
        for b1 in (0, 1):
            a = np.zeros(4, dtype=complex)
            a[2 * b0 + b1] = 1.0
            out = apply_cnot(a, n, 0, 1)
            expect = 2 * b0 + (b1 ^ b0)
            assert out[expect] == 1.0


def test_swap_matches_double_cnot():
    a = random_state(3, seed=2)
    direct = apply_swap(a, 3, 0, 2)
    chained = apply_cnot(apply_cnot(apply_cnot(a, 3, 0, 2), 3, 2, 0), 3, 0, 2)
    assert direct == pytest.approx(chained, abs=1e-14)


def test_qft_roundtrip():
    a = random_state(4, seed=3)
    back = apply_qft(apply_qft(a, 4), 4, inverse=True)
    assert np.max(np.abs(back - a)) < 1e-10


def test_qft_matches_dft_matrix():
    n = 3
    N = 2**n
    omega = np.exp(2j * np.pi / N)
    dft = omega ** (np.arange(N)[:, None] * np.arange(N)[None, :]) / np.sqrt(N)
    a = random_state(n, seed=4)
    assert apply_qft(a, n) == pytest.approx(dft @ a, abs=1e-12)


def test_qft_produces_real_space_samples():
    # After encoding momentum coefficients, the QFT output at index m equals
    # 2^(-n/2) sqrt(L) psi(x_m) with x_m = m L / 2^n.
    rng = np.random.default_rng(5)
    L, n, n_pw = 30.0, 4, 7
    c = rng.normal(size=n_pw) + 1j * rng.normal(size=n_pw)
    c /= np.linalg.norm(c)
    state = encode_amplitudes(c, n)
    grid = apply_qft(state.amps, n)
    js = np.arange(-3, 4)
    x = np.arange(2**n) * (L / 2**n)
    psi = sum(cj * np.exp(2j * np.pi * j * x / L) / np.sqrt(L)
              for cj, j in zip(c, js))
    assert np.max(np.abs(grid - 2 ** (-n / 2) * np.sqrt(L) * psi)) < 1e-10


def test_qft_on_subregister():
    # QFT on qubits [1, 3) of a product state acts only on that factor
    a0 = random_state(1, seed=6)
    a1 = random_state(2, seed=7)
    a2 = random_state(1, seed=8)
    full = np.kron(a0, np.kron(a1, a2))
    out = apply_qft(full, 4, start=1, size=2)
    expect = np.kron(a0, np.kron(apply_qft(a1, 2), a2))
    assert out == pytest.approx(expect, abs=1e-12)


def test_diag_subregister_broadcasts_batches():
    batch = np.stack([random_state(3, seed=s) for s in (9, 10)])
    diag = np.exp(1j * np.array([[0.1, 0.2], [0.3, 0.4]]))
    out = apply_diag_subregister(batch, 3, 1, 1, diag)
    manual = batch.reshape(2, 2, 2, 2) * diag[:, None, :, None]
    assert out == pytest.approx(manual.reshape(2, 8), abs=1e-14)


def test_batched_kernels_match_loop():
    batch = np.stack([random_state(3, seed=s) for s in range(4)])
    out = apply_rotation(batch, 3, 1, "y", 0.37)
    for i in range(4):
        single = apply_rotation(batch[i], 3, 1, "y", 0.37)
        assert out[i] == pytest.approx(single, abs=1e-14)


def test_apply_gate_entry_point():
    s = Statevector(2, np.array([1, 0, 0, 0], dtype=complex))
    out = apply_gate(s, "ry", 0, angle=np.pi)
    assert abs(out.amps[2]) == pytest.approx(1.0)
    with pytest.raises(SimError):
        apply_gate(s, "cnot", [1, 1])
    with pytest.raises(SimError):
        apply_gate(s, "hadamard", 0)


def test_fidelity_properties():
    a = Statevector(3, random_state(3, seed=11))
    b = Statevector(3, random_state(3, seed=12))
    assert fidelity(a, a) == pytest.approx(1.0, abs=1e-12)
    # gauge invariance under a global phase
    c = Statevector(3, a.amps * np.exp(0.77j))
    assert fidelity(c, b) == pytest.approx(fidelity(a, b), abs=1e-14)
    assert 0.0 <= fidelity(a, b) <= 1.0


def test_statevector_norm_check():
    with pytest.raises(NormalizationError):
        Statevector(2, np.array([1.0, 1.0, 0.0, 0.0]))
