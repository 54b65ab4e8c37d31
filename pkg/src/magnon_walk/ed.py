"""Exact-diagonalization references for tiny J1-J2 systems.

Two independent routes:

* the full 2^L spin-1/2 Hilbert space, built bond by bond from S_i . S_j
  in the S^z basis (bit 1 = flipped spin), and
* the N-dimensional single-magnon sector governed by a :class:`HopMatrix`.

Both evolve by eigendecomposition so they are accurate to machine
precision. The full-space Hamiltonian conserves the number of flipped
spins, so its eigendecomposition is taken block by block; the result is
the same spectrum as a dense ``eigh`` of the whole matrix.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import DimensionMismatchError, SystemTooLargeError, ValidationError
from .lattice import NN_VECTORS, NNN_VECTORS, CouplingParams, LatticeSpec
from .walk import DensityField, HopMatrix

MAX_SITES = 14


def lattice_bonds(params: CouplingParams, lattice: LatticeSpec) -> dict[tuple[int, int], float]:
    """Exchange constant of every coupled site pair (i < j).

    Each site couples to its 4 nearest and 4 diagonal neighbours; summing
    over sites and halving counts every bond once. On lattices narrower
    than 3 sites several displacement vectors reach the same partner and
    their couplings add; vectors that wrap back onto the site itself only
    give a constant and are dropped.
    """
    bonds: dict[tuple[int, int], float] = {}
    for m in range(lattice.nx):
        for n in range(lattice.ny):
            i = lattice.site_index(m, n)
            for vecs, j in ((NN_VECTORS, params.j1), (NNN_VECTORS, params.j2)):
                if j == 0.0:
                    continue
                for d in vecs:
                    k = lattice.site_index(m + d[0], n + d[1])
                    if k == i:
                        continue
                    key = (min(i, k), max(i, k))
                    bonds[key] = bonds.get(key, 0.0) + 0.5 * j
    return bonds


def _check_size(n_sites: int) -> None:
    if n_sites > MAX_SITES:
        raise SystemTooLargeError(
            f"too large: {n_sites} sites exceeds the full-space ED cap of {MAX_SITES}"
        )


def heisenberg_from_bonds(n_sites: int, bonds: dict[tuple[int, int], float]) -> np.ndarray:
    """Dense sum of J_ij S_i . S_j over the given bonds, spin-1/2, real symmetric."""
    _check_size(n_sites)
    dim = 1 << n_sites
    H = np.zeros((dim, dim))
    states = np.arange(dim)
    for (i, j), J in bonds.items():
        bi = (states >> i) & 1
        bj = (states >> j) & 1
        # S^z_i S^z_j: +1/4 aligned, -1/4 anti-aligned
        H[states, states] += J * np.where(bi == bj, 0.25, -0.25)
        # (S+_i S-_j + S-_i S+_j)/2 swaps anti-aligned pairs
        flip = np.flatnonzero(bi != bj)
        H[flip ^ (1 << i) ^ (1 << j), flip] += 0.5 * J
    return H


def build_full_hamiltonian(params: CouplingParams, lattice: LatticeSpec) -> np.ndarray:
    """J1-J2 Heisenberg Hamiltonian on the periodic lattice, 2^L x 2^L."""
    _check_size(lattice.n_sites)
    return heisenberg_from_bonds(lattice.n_sites, lattice_bonds(params, lattice))


def sz_diagonal(n_sites: int, site: int) -> np.ndarray:
    """Eigenvalues of S^z at ``site`` over the computational basis: +1/2 up, -1/2 flipped."""
    states = np.arange(1 << n_sites)
    return 0.5 - ((states >> site) & 1)


def magnon_number(n_sites: int) -> np.ndarray:
    states = np.arange(1 << n_sites)
    return np.array([bin(s).count("1") for s in states])


class FullSpaceEvolver:
    """exp(-iHt) on the full spin Hilbert space via sector-wise eigendecomposition."""

    def __init__(self, H: np.ndarray):
        n_sites = int(round(np.log2(H.shape[0])))
        if H.shape != (1 << n_sites, 1 << n_sites):
            raise DimensionMismatchError(f"Hamiltonian shape {H.shape} is not 2^L square")
        self.n_sites = n_sites
        self.H = H
        counts = magnon_number(n_sites)
        self.sectors = []
        for q in range(n_sites + 1):
            idx = np.flatnonzero(counts == q)
            block = H[np.ix_(idx, idx)]
            evals, evecs = np.linalg.eigh(block)
            self.sectors.append((idx, evals, evecs))

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.sort(np.concatenate([s[1] for s in self.sectors]))

    def evolve(self, psi: np.ndarray, t: float) -> np.ndarray:
        """exp(-iHt) psi; negative ``t`` evolves backwards."""
        out = np.zeros(psi.shape, dtype=complex)
        for idx, evals, evecs in self.sectors:
            block = psi[idx]
            if not np.any(block):
                continue
            out[idx] = evecs @ (np.exp(-1j * evals * t) * (evecs.conj().T @ block))
        return out


@lru_cache(maxsize=32)
def _evolver(params: CouplingParams, lattice: LatticeSpec) -> FullSpaceEvolver:
    return FullSpaceEvolver(build_full_hamiltonian(params, lattice))


def flipped_state(n_sites: int, site: int) -> np.ndarray:
    """S^- at ``site`` applied to the fully polarised state."""
    psi = np.zeros(1 << n_sites, dtype=complex)
    psi[1 << site] = 1.0
    return psi


def ed_density(
    params: CouplingParams,
    lattice: LatticeSpec,
    r0: tuple[int, int],
    t: float,
    path: str = "full",
) -> DensityField:
    """Magnon density <n_r(t)> after flipping the spin at ``r0``.

    ``path="full"`` evolves in the whole spin Hilbert space (site cap
    applies); ``path="single"`` uses the single-magnon hopping matrix.
    """
    if not t >= 0:
        raise ValidationError(f"time must be non-negative, got {t}")
    s0 = lattice.site_index(*r0)
    if path == "full":
        L = lattice.n_sites
        _check_size(L)
        psi = _evolver(params, lattice).evolve(flipped_state(L, s0), t)
        prob = np.abs(psi) ** 2
        states = np.arange(1 << L)
        n = np.array([prob[(states >> s) & 1 == 1].sum() for s in range(L)])
    elif path == "single":
        from .walk import hop_matrix

        psi0 = np.zeros(lattice.n_sites, dtype=complex)
        psi0[s0] = 1.0
        n = np.abs(single_magnon_evolve(hop_matrix(params, lattice), psi0, t)) ** 2
    else:
        raise ValidationError(f"unknown path {path!r}")
    return DensityField(float(t), n.reshape(lattice.shape), (r0[0] % lattice.nx, r0[1] % lattice.ny), lattice)


def ed_otoc(
    params: CouplingParams,
    lattice: LatticeSpec,
    r0: tuple[int, int],
    r: tuple[int, int],
    t,
):
    """Full-space OTOC <phi| S+_0 Sz_r(t) Sz_0 Sz_r(t) Sz_0 S-_0 |phi>, normalised to 1 at t = 0.

    ``r`` is the separation from ``r0``. The raw expectation at t = 0 is the
    product of four S^z eigenvalues, 1/16; the result is multiplied by 16.
    ``t`` may be a scalar or an array of times.
    """
    L = lattice.n_sites
    _check_size(L)
    ev = _evolver(params, lattice)
    s0 = lattice.site_index(*r0)
    sr = lattice.site_index(r0[0] + r[0], r0[1] + r[1])
    z0 = sz_diagonal(L, s0)
    zr = sz_diagonal(L, sr)
    v = flipped_state(L, s0)

    def one(tt: float) -> float:
        if not tt >= 0:
            raise ValidationError(f"time must be non-negative, got {tt}")
        w = z0 * v
        w = ev.evolve(zr * ev.evolve(w, tt), -tt)
        w = z0 * w
        w = ev.evolve(zr * ev.evolve(w, tt), -tt)
        val = np.vdot(v, w)
        return 16.0 * float(val.real)

    if np.ndim(t) == 0:
        return one(float(t))
    return np.array([one(float(tt)) for tt in np.asarray(t)])


def expectation_energy(H: np.ndarray, psi: np.ndarray) -> float:
    return float(np.real(np.vdot(psi, H @ psi)))


def single_magnon_evolve(hop: HopMatrix, psi0: np.ndarray, t: float) -> np.ndarray:
    """psi(t) = exp(-i P t) psi0 by eigendecomposition of the hopping matrix."""
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (hop.n_sites,):
        raise DimensionMismatchError(f"state of shape {psi0.shape} does not match {hop.n_sites} sites")
    evals, evecs = hop.spectrum
    return evecs @ (np.exp(-1j * evals * t) * (evecs.conj().T @ psi0))
