import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magnon_walk.ed import (
    FullSpaceEvolver,
    build_full_hamiltonian,
    ed_density,
    ed_otoc,
    expectation_energy,
    flipped_state,
    heisenberg_from_bonds,
    lattice_bonds,
    magnon_number,
    single_magnon_evolve,
    sz_diagonal,
)
from magnon_walk.errors import DimensionMismatchError, SystemTooLargeError, ValidationError
from magnon_walk.lattice import CouplingParams, LatticeSpec, grid_dispersion
from magnon_walk.otoc import otoc_field
from magnon_walk.walk import density_field_fft, hop_matrix

SX = np.array([[0, 1], [1, 0]]) / 2
SY = np.array([[0, -1j], [1j, 0]]) / 2
SZ = np.array([[1, 0], [0, -1]]) / 2


def kron_heisenberg(n_sites, bonds):
    """Brute-force sum of J S_i . S_j from Kronecker products.

    Site i is bit i of the basis index (bit 0 least significant), so the
    Kronecker factors run from site n-1 down to site 0.
    """
    dim = 2**n_sites
    H = np.zeros((dim, dim), dtype=complex)
    for (i, j), J in bonds.items():
        for S in (SX, SY, SZ):
            ops = [np.eye(2)] * n_sites
            ops[i] = S
            ops[j] = S
            term = np.array([[1.0]])
            for site in reversed(range(n_sites)):
                term = np.kron(term, ops[site])
            H += J * term
    return H


def test_single_bond_spectrum_is_triplet_and_singlet():
    J = -1.3
    evals = np.linalg.eigvalsh(heisenberg_from_bonds(2, {(0, 1): J}))
    assert np.allclose(np.sort(evals), np.sort([J / 4] * 3 + [-3 * J / 4]), atol=1e-14)


@pytest.mark.parametrize("shape,j2", [((3, 1), 0.0), ((4, 1), 0.0), ((2, 2), -0.5), ((3, 3), -0.7)])
def test_builder_matches_kronecker_oracle(shape, j2):
    lat = LatticeSpec(*shape)
    bonds = lattice_bonds(CouplingParams(-1.0, j2), lat)
    H = build_full_hamiltonian(CouplingParams(-1.0, j2), lat)
    assert np.abs(H - kron_heisenberg(lat.n_sites, bonds)).max() < 1e-14


def test_bond_couplings():
    # ring of three: each pair is a single nn bond of strength J1
    assert lattice_bonds(CouplingParams(-1.0, 0.0), LatticeSpec(3, 1)) == {
        (0, 1): -1.0,
        (0, 2): -1.0,
        (1, 2): -1.0,
    }
    # 3x3 torus: every site pair is either an nn or a diagonal bond
    b = lattice_bonds(CouplingParams(-1.0, -0.5), LatticeSpec(3, 3))
    assert len(b) == 36
    assert sorted(set(b.values())) == [-1.0, -0.5]
    # two-site ring: +x and -x reach the same partner, couplings add
    assert lattice_bonds(CouplingParams(-1.0, 0.0), LatticeSpec(2, 1)) == {(0, 1): -2.0}


def test_polarized_state_energy_on_three_site_ring():
    p = CouplingParams(-1.0, 0.0)
    lat = LatticeSpec(3, 1)
    H = build_full_hamiltonian(p, lat)
    up = np.zeros(8)
    up[0] = 1.0
    assert np.allclose(H @ up, H[0, 0] * up)
    bonds = lattice_bonds(p, lat)
    assert H[0, 0] == pytest.approx(sum(bonds.values()) / 4)
    assert H[0, 0] == pytest.approx(3 * p.j1 / 4)


@pytest.mark.parametrize("shape", [(3, 1), (2, 2), (3, 3), (5, 2)])
def test_hamiltonian_hermitian_and_conserves_sz(shape):
    lat = LatticeSpec(*shape)
    H = build_full_hamiltonian(CouplingParams(-1.0, -0.4), lat)
    assert np.abs(H - H.conj().T).max() < 1e-12
    sz_total = np.diag(sum(sz_diagonal(lat.n_sites, s) for s in range(lat.n_sites)))
    assert np.abs(sz_total @ H - H @ sz_total).max() < 1e-12


@pytest.mark.parametrize("shape,j2", [((7, 1), 0.0), ((3, 3), -1.0), ((2, 2), -0.3), ((4, 3), -0.6)])
def test_one_magnon_excitations_are_minus_dispersion(shape, j2):
    p = CouplingParams(-1.0, j2)
    lat = LatticeSpec(*shape)
    H = build_full_hamiltonian(p, lat)
    idx = np.flatnonzero(magnon_number(lat.n_sites) == 1)
    exc = np.linalg.eigvalsh(H[np.ix_(idx, idx)]) - H[0, 0]
    assert np.abs(np.sort(exc) - np.sort(-grid_dispersion(lat, p).ravel())).max() < 1e-12


def test_sector_eigendecomposition_reproduces_dense_spectrum():
    H = build_full_hamiltonian(CouplingParams(-1.0, -0.6), LatticeSpec(3, 3))
    ev = FullSpaceEvolver(H)
    assert np.abs(ev.eigenvalues - np.linalg.eigvalsh(H)).max() < 1e-11


def test_size_cap():
    with pytest.raises(SystemTooLargeError, match="too large"):
        build_full_hamiltonian(CouplingParams(), LatticeSpec(5, 5))
    with pytest.raises(SystemTooLargeError):
        ed_otoc(CouplingParams(), LatticeSpec(15, 1), (0, 0), (0, 0), 0.0)


def test_evolver_rejects_non_power_of_two():
    with pytest.raises(DimensionMismatchError):
        FullSpaceEvolver(np.eye(6))


def test_energy_conserved_along_evolution():
    lat = LatticeSpec(3, 3)
    H = build_full_hamiltonian(CouplingParams(-1.0, -0.8), lat)
    ev = FullSpaceEvolver(H)
    rng = np.random.default_rng(3)
    psi = rng.normal(size=512) + 1j * rng.normal(size=512)
    psi /= np.linalg.norm(psi)
    e0 = expectation_energy(H, psi)
    for t in (0.3, 2.0, 7.5):
        out = ev.evolve(psi, t)
        assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-12)
        assert expectation_energy(H, out) == pytest.approx(e0, abs=1e-10)


@pytest.mark.parametrize(
    "shape,params",
    [((11, 1), CouplingParams(-1.0, 0.0)), ((3, 3), CouplingParams(-1.0, -1.0)), ((2, 3), CouplingParams(-0.4, -0.9))],
)
def test_ed_density_matches_walk(shape, params):
    lat = LatticeSpec(*shape)
    for t in (0.0, 0.8, 2.5, 5.0):
        walk = density_field_fft(t, params, lat, (1, 0)).values
        full = ed_density(params, lat, (1, 0), t).values
        single = ed_density(params, lat, (1, 0), t, path="single").values
        assert np.abs(full - walk).max() < 1e-10
        assert np.abs(single - walk).max() < 1e-10


def test_ed_density_rejects_unknown_path_and_negative_time():
    lat = LatticeSpec(3, 1)
    with pytest.raises(ValidationError):
        ed_density(CouplingParams(), lat, (0, 0), 1.0, path="krylov")
    with pytest.raises(ValidationError):
        ed_density(CouplingParams(), lat, (0, 0), -1.0)


def test_ed_otoc_is_one_at_time_zero():
    lat = LatticeSpec(3, 3)
    for r in [(0, 0), (1, 0), (1, 1), (2, 1)]:
        assert ed_otoc(CouplingParams(-1.0, -1.0), lat, (0, 0), r, 0.0) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("shape,sep", [((3, 1), (0, 0)), ((7, 1), (1, 0)), ((3, 3), (1, 1)), ((2, 2), (1, 0))])
def test_ed_otoc_matches_spin_wave(shape, sep):
    p = CouplingParams(-1.0, -1.0 if shape[1] > 1 else 0.0)
    lat = LatticeSpec(*shape)
    ts = np.linspace(0, 6, 25)
    ed = ed_otoc(p, lat, (0, 0), sep, ts)
    sw = np.array([otoc_field(t, p, lat)[sep[0] % lat.nx, sep[1] % lat.ny] for t in ts])
    assert np.abs(ed - sw).max() < 1e-8


@given(st.floats(0.0, 50.0), st.floats(-1.5, 0.0), st.floats(-1.5, 0.0))
@settings(max_examples=30)
def test_single_magnon_evolve_is_unitary(t, j1, j2):
    hop = hop_matrix(CouplingParams(j1, j2), LatticeSpec(4, 3))
    rng = np.random.default_rng(0)
    psi = rng.normal(size=12) + 1j * rng.normal(size=12)
    psi /= np.linalg.norm(psi)
    out = single_magnon_evolve(hop, psi, t)
    assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-12)


def test_single_magnon_evolve_identity_and_dimension_check():
    hop = hop_matrix(CouplingParams(), LatticeSpec(3, 3))
    psi = np.zeros(9, dtype=complex)
    psi[4] = 1.0
    assert np.allclose(single_magnon_evolve(hop, psi, 0.0), psi, atol=1e-14)
    with pytest.raises(DimensionMismatchError):
        single_magnon_evolve(hop, np.ones(8), 1.0)


def test_flipped_state_sits_in_one_magnon_sector():
    psi = flipped_state(5, 3)
    assert magnon_number(5)[np.argmax(np.abs(psi))] == 1
    assert sz_diagonal(5, 3)[np.argmax(np.abs(psi))] == -0.5
