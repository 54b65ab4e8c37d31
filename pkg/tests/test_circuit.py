import math

import numpy as np
import pytest
import scipy.linalg as sl
from hypothesis import given
from hypothesis import strategies as st

from magnon_walk.circuit import (
    Circuit,
    Gate,
    Statevector,
    bond_layers,
    build_evolution_circuit,
    build_trotter_step,
    build_u1,
    build_u2_pair,
    chain_hamiltonian,
    chain_hop_matrix,
    cx,
    hopping_pair_unitary,
    measure_densities,
    phase_aligned_distance,
    run,
    ry,
    trotter_schedule,
    u1,
)
from magnon_walk.ed import single_magnon_evolve
from magnon_walk.errors import DimensionMismatchError, ValidationError

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SP = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|, with |1> the flipped spin
steps = st.floats(-1.0, 1.0, allow_nan=False)


def exact_chain_density(L, t, flip, j1=-1.0, periodic=False):
    psi0 = np.zeros(L, dtype=complex)
    psi0[flip] = 1.0
    return np.abs(single_magnon_evolve(chain_hop_matrix(L, j1, periodic), psi0, t)) ** 2


def number_operator(L):
    states = np.arange(2**L)
    return np.diag([bin(s).count("1") for s in states]).astype(complex)


def test_gate_matrices_unitary():
    for g in [u1(0, 0.3), ry(0, -1.1), Gate("rz", (0,), 2.2), cx(0, 1)]:
        M = g.to_matrix()
        assert np.abs(M.conj().T @ M - np.eye(M.shape[0])).max() < 1e-12


def test_gate_validation():
    with pytest.raises(ValidationError):
        Gate("h", (0,))
    with pytest.raises(ValidationError):
        Gate("cx", (1, 1))
    with pytest.raises(ValidationError):
        Gate("ry", (0,))
    with pytest.raises(ValidationError):
        Circuit(2, [cx(0, 2)])
    with pytest.raises(ValidationError):
        Circuit(21)


def test_cnot_truth_table():
    out = run(Circuit(2, [cx(0, 1)]), Statevector.from_label("10"))
    assert np.allclose(out.amplitudes, Statevector.from_label("11").amplitudes)
    out = run(Circuit(2, [cx(0, 1)]), Statevector.from_label("01"))
    assert np.allclose(out.amplitudes, Statevector.from_label("01").amplitudes)


def test_empty_circuit_returns_input():
    psi = Statevector.from_label("101")
    assert np.array_equal(run(Circuit(3), psi).amplitudes, psi.amplitudes)


def test_run_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        run(Circuit(3), Statevector.from_label("10"))
    with pytest.raises(DimensionMismatchError):
        Statevector(np.ones(3))


def test_statevector_labels():
    with pytest.raises(ValidationError):
        Statevector.from_label("012")
    assert Statevector.from_label("10000").n_qubits == 5
    assert np.array_equal(measure_densities(Statevector.from_label("10000")), [1, 0, 0, 0, 0])


def test_u1_phase_on_excited_state():
    dt = 0.37
    out = run(build_u1(1, dt), Statevector(np.array([1, 1]) / math.sqrt(2)))
    assert out.amplitudes[1] / out.amplitudes[0] == pytest.approx(np.exp(-1j * dt))
    assert np.allclose(build_u1(1, 0.0).unitary(), np.eye(2))
    assert len(build_u1(4, dt)) == 4


@given(steps)
def test_u2_pair_equals_exponentiated_hopping(dt):
    target = sl.expm(1j * dt * (np.kron(SP, SP.T) + np.kron(SP.T, SP)))
    assert np.abs(hopping_pair_unitary(dt) - target).max() < 1e-13
    assert phase_aligned_distance(build_u2_pair(dt).unitary(), target) < 1e-12


def test_u2_pair_examples():
    dt = 0.42
    out = run(build_u2_pair(dt), Statevector.from_label("01")).amplitudes
    assert out[1] == pytest.approx(math.cos(dt))
    assert out[2] == pytest.approx(1j * math.sin(dt))
    for label in ("00", "11"):
        a = run(build_u2_pair(dt), Statevector.from_label(label)).amplitudes
        assert abs(a[int(label, 2)]) == pytest.approx(1.0)
    assert phase_aligned_distance(build_u2_pair(0.0).unitary(), np.eye(4)) < 1e-12
    kinds = {g.kind for g in build_u2_pair(dt).gates}
    assert kinds <= {"cx", "ry", "rz"}


def test_u2_pair_is_the_xx_plus_yy_rotation():
    dt = 0.21
    U = sl.expm(1j * dt * (np.kron(X, X) + np.kron(Y, Y)) / 2)
    assert phase_aligned_distance(build_u2_pair(dt).unitary(), U) < 1e-12


def test_bond_layers():
    assert bond_layers(5) == [[(0, 1), (2, 3)], [(1, 2), (3, 4)]]
    assert bond_layers(4, periodic=True) == [[(0, 1), (2, 3)], [(1, 2), (3, 0)]]
    assert bond_layers(5, periodic=True)[-1] == [(4, 0)]
    with pytest.raises(ValidationError):
        bond_layers(2, periodic=True)


@pytest.mark.parametrize("L,periodic", [(2, False), (5, False), (4, True), (5, True)])
def test_step_is_unitary_and_conserves_number(L, periodic):
    U = build_trotter_step(L, 0.13, periodic=periodic).unitary()
    assert np.abs(U.conj().T @ U - np.eye(2**L)).max() < 1e-12
    N = number_operator(L)
    assert np.abs(U @ N - N @ U).max() < 1e-12


def test_one_step_close_to_exact_propagator():
    L, dt = 5, 0.1
    exact = sl.expm(-1j * chain_hamiltonian(L) * dt)
    err = phase_aligned_distance(build_trotter_step(L, dt).unitary(), exact)
    assert 1e-5 < err < 1e-3


def test_chain_hamiltonian_single_excitation_block_is_hop_matrix():
    L = 5
    H = chain_hamiltonian(L, periodic=True)
    idx = [1 << (L - 1 - q) for q in range(L)]
    assert np.allclose(H[np.ix_(idx, idx)], chain_hop_matrix(L, periodic=True).to_dense())
    assert np.allclose(H, H.conj().T)


def test_step_error_is_third_order():
    L = 5
    H = chain_hamiltonian(L)
    errs = [
        phase_aligned_distance(build_trotter_step(L, dt).unitary(), sl.expm(-1j * H * dt)) for dt in (0.1, 0.05)
    ]
    assert errs[0] / errs[1] == pytest.approx(8.0, rel=0.1)


def test_schedule():
    assert trotter_schedule(0.75, 0.1) == pytest.approx([0.1] * 7 + [0.05])
    assert trotter_schedule(0.5, 0.1) == pytest.approx([0.1] * 5)
    assert trotter_schedule(0.0, 0.1) == []
    assert trotter_schedule(3.0, 0.0) == [0.0]
    with pytest.raises(ValidationError):
        trotter_schedule(-1.0, 0.1)


def test_walk_circuit_density_profile():
    dens = measure_densities(run(build_evolution_circuit(5, 0.5, 0.1), Statevector.zero(5)))
    assert np.argmax(dens) == 2
    assert dens.sum() == pytest.approx(1.0, abs=1e-10)
    assert np.all((dens >= 0) & (dens <= 1))
    exact = exact_chain_density(5, 0.5, 2)
    assert np.abs(exact - exact[::-1]).max() < 1e-12


def test_mirror_asymmetry_is_a_second_order_trotter_artifact():
    # Mirroring the chain swaps the even and odd bond layers, which do not
    # commute, so the circuit is mirror symmetric only up to O(dt^2).
    asym = []
    for dt in (0.1, 0.05):
        dens = measure_densities(run(build_evolution_circuit(5, 0.5, dt), Statevector.zero(5)))
        asym.append(np.abs(dens - dens[::-1]).max())
    assert asym[0] < 2e-3
    assert asym[0] / asym[1] == pytest.approx(4.0, rel=0.1)


def test_quarter_time_snapshot_matches_exact():
    dens = measure_densities(run(build_evolution_circuit(5, 0.25, 0.1), Statevector.zero(5)))
    assert np.abs(dens - exact_chain_density(5, 0.25, 2)).max() < 0.02


def test_zero_step_circuit_keeps_initial_state():
    dens = measure_densities(run(build_evolution_circuit(5, 0.75, 0.0), Statevector.zero(5)))
    assert np.array_equal(dens, [0, 0, 1, 0, 0])


def test_convergence_towards_exact_with_smaller_steps():
    errs = []
    for dt in (0.2, 0.1, 0.05):
        dens = measure_densities(run(build_evolution_circuit(5, 1.0, dt, flip=1), Statevector.zero(5)))
        errs.append(np.abs(dens - exact_chain_density(5, 1.0, 1)).max())
    assert errs[0] > errs[1] > errs[2]


def test_global_error_slope_is_two():
    dts = np.array([0.2, 0.1, 0.05, 0.025])
    errs = []
    for dt in dts:
        dens = measure_densities(run(build_evolution_circuit(5, 1.0, dt), Statevector.zero(5)))
        errs.append(np.abs(dens - exact_chain_density(5, 1.0, 2)).max())
    slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    assert 1.8 <= slope <= 2.2


def test_periodic_circuit_tracks_periodic_chain():
    dens = measure_densities(run(build_evolution_circuit(5, 1.0, 0.02, periodic=True), Statevector.zero(5)))
    assert np.abs(dens - exact_chain_density(5, 1.0, 2, periodic=True)).max() < 1e-3


def test_other_couplings_scale_the_clock():
    # j1 = -2 over time t is j1 = -1 over 2t
    a = measure_densities(run(build_evolution_circuit(4, 0.4, 0.05, j1=-2.0, flip=0), Statevector.zero(4)))
    b = measure_densities(run(build_evolution_circuit(4, 0.8, 0.1, j1=-1.0, flip=0), Statevector.zero(4)))
    assert np.abs(a - b).max() < 1e-12


def test_circuit_metadata():
    c = build_evolution_circuit(5, 0.25, 0.1)
    assert c.metadata["steps"] == 3
    assert c.metadata["delta_t"] == 0.1
    assert c.gates[0].kind == "ry" and c.gates[0].qubits == (2,)
