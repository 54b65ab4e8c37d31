"""Single spin-flip quantum walk on the ferromagnetic background.

A flipped spin at r0 evolves as a single magnon. Its amplitude at
separation r is the lattice Green function

    psi(r, t) = (1/N) sum_k exp[i (k.r - omega_k t)]

and the visualised density is xi(r, t) = |psi(r, t)|^2. The same dynamics
follows from the real-space hopping matrix returned by :func:`hop_matrix`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import EmptyFrameError, ValidationError
from .lattice import (
    NN_VECTORS,
    NNN_VECTORS,
    CouplingParams,
    Displacement,
    LatticeSpec,
    grid_dispersion,
)

Direction = Literal["axial", "diagonal"]


@dataclass
class DensityField:
    """Magnon density over all sites at one time.

    ``values`` has shape (nx, ny); ``origin`` is the flipped site (m0, n0).
    """

    time: float
    values: np.ndarray
    origin: tuple[int, int]
    lattice: LatticeSpec

    def at(self, r: tuple[int, int]) -> float:
        """Density at displacement ``r`` from the origin (periodic wrap)."""
        m, n = self.lattice.shift(self.origin, r)
        return float(self.values[m, n])

    def centered(self) -> np.ndarray:
        """Values rolled so the origin sits at ``lattice.center``."""
        cx, cy = self.lattice.center
        return np.roll(self.values, (cx - self.origin[0], cy - self.origin[1]), axis=(0, 1))

    @property
    def total(self) -> float:
        return float(self.values.sum())


@dataclass
class WalkFrameSet:
    params: CouplingParams
    lattice: LatticeSpec
    times: list[float]
    frames: list[DensityField] = field(default_factory=list)


@dataclass
class HopMatrix:
    """Single-magnon Hamiltonian in the site basis.

    ``matrix`` is a CSR matrix over flat site indices. Coinciding neighbour
    classes on small lattices are summed into a single entry.
    """

    matrix: sp.csr_matrix
    shape: tuple[int, int]

    @property
    def n_sites(self) -> int:
        return self.matrix.shape[0]

    @property
    def entries(self) -> dict[tuple[int, int], float]:
        coo = self.matrix.tocoo()
        return {(int(i), int(j)): float(v) for i, j, v in zip(coo.row, coo.col, coo.data)}

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """(eigenvalues, eigenvectors) of the dense matrix."""
        return np.linalg.eigh(self.to_dense())


def _phases(lattice: LatticeSpec, params: CouplingParams, t: float, sign: int = -1) -> np.ndarray:
    return np.exp(sign * 1j * grid_dispersion(lattice, params) * t)


def _check_time(t: float) -> None:
    if not t >= 0:
        raise ValidationError(f"time must be non-negative, got {t}")


def wavefunction(r: tuple[int, int], t: float, params: CouplingParams, lattice: LatticeSpec) -> complex:
    """Amplitude psi(r, t) by direct summation over the momentum grid."""
    _check_time(t)
    k = lattice.kgrid()
    dx, dy = r
    terms = np.exp(1j * (k.kx * dx + k.ky * dy)) * _phases(lattice, params, t)
    return complex(terms.sum() / lattice.n_sites)


def density(r: tuple[int, int], t: float, params: CouplingParams, lattice: LatticeSpec) -> float:
    return abs(wavefunction(r, t, params, lattice)) ** 2


def amplitude_field(t: float, params: CouplingParams, lattice: LatticeSpec) -> np.ndarray:
    """psi(r, t) for every displacement r at once, indexed [dx mod nx, dy mod ny].

    numpy's inverse FFT already carries the +i sign and the 1/N factor.
    At t = 0 the plane waves sum to an exact Kronecker delta, which is
    returned directly rather than with FFT round-off.
    """
    _check_time(t)
    if t == 0:
        psi = np.zeros(lattice.shape, dtype=complex)
        psi[0, 0] = 1.0
        return psi
    return np.fft.ifft2(_phases(lattice, params, t))


def density_field_fft(
    t: float,
    params: CouplingParams,
    lattice: LatticeSpec,
    r0: tuple[int, int] | None = None,
) -> DensityField:
    """Density frame for a flip at ``r0`` (default: lattice center) via one inverse FFT."""
    r0 = lattice.center if r0 is None else (r0[0] % lattice.nx, r0[1] % lattice.ny)
    xi = np.abs(amplitude_field(t, params, lattice)) ** 2
    xi = np.roll(xi, r0, axis=(0, 1))
    return DensityField(float(t), xi, r0, lattice)


def density_field_naive(
    t: float,
    params: CouplingParams,
    lattice: LatticeSpec,
    r0: tuple[int, int] | None = None,
) -> DensityField:
    """Per-site k-sum evaluation; O(N^2), intended for cross-checks only."""
    r0 = lattice.center if r0 is None else r0
    xi = np.empty(lattice.shape)
    for m in range(lattice.nx):
        for n in range(lattice.ny):
            xi[m, n] = density((m - r0[0], n - r0[1]), t, params, lattice)
    return DensityField(float(t), xi, r0, lattice)


def walk_frames(
    times: Sequence[float],
    params: CouplingParams,
    lattice: LatticeSpec,
    r0: tuple[int, int] | None = None,
) -> WalkFrameSet:
    times = [float(t) for t in times]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValidationError("frame times must be strictly increasing")
    frames = [density_field_fft(t, params, lattice, r0) for t in times]
    return WalkFrameSet(params, lattice, times, frames)


def hop_matrix(params: CouplingParams, lattice: LatticeSpec) -> HopMatrix:
    """Real-space spin-exchange matrix P between sites.

    Diagonal 2(J1 + J2), J1/2 to each of the four nearest neighbours and
    J2/2 to each of the four diagonal neighbours, periodic in both
    directions. Entries that land on the same site pair are summed, so
    every row sums to 4 (J1 + J2) on any lattice size.
    """
    N = lattice.n_sites
    rows, cols, vals = [], [], []
    for m in range(lattice.nx):
        for n in range(lattice.ny):
            s = lattice.site_index(m, n)
            rows.append(s)
            cols.append(s)
            vals.append(2.0 * (params.j1 + params.j2))
            for vecs, j in ((NN_VECTORS, params.j1), (NNN_VECTORS, params.j2)):
                if j == 0.0:
                    continue
                for d in vecs:
                    rows.append(s)
                    cols.append(lattice.site_index(m + d[0], n + d[1]))
                    vals.append(0.5 * j)
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(N, N)).tocsr()
    mat.sum_duplicates()
    return HopMatrix(mat, lattice.shape)


def _direction_offsets(direction: Direction, reach: int):
    if direction == "axial":
        units = ((1, 0), (-1, 0), (0, 1), (0, -1))
        step = 1.0
    elif direction == "diagonal":
        units = NNN_VECTORS
        step = np.sqrt(2.0)
    else:
        raise ValidationError(f"direction must be 'axial' or 'diagonal', got {direction!r}")
    for k in range(reach + 1):
        for u in units:
            yield k * step, (k * u[0], k * u[1])


def front_radius(frame: DensityField, direction: Direction, threshold: float = 0.25) -> float:
    """Largest |r| along ``direction`` whose density exceeds ``threshold * max``.

    All four rays of the direction class are scanned, out to half the
    shorter lattice side so periodic images are never counted.
    """
    if not 0 < threshold < 1:
        raise ValidationError(f"threshold must lie in (0, 1), got {threshold}")
    peak = frame.values.max()
    if not peak > 0:
        raise EmptyFrameError("empty frame")
    reach = min(frame.lattice.nx, frame.lattice.ny) // 2
    best = 0.0
    for radius, r in _direction_offsets(direction, reach):
        if frame.at(r) > threshold * peak:
            best = max(best, radius)
    return best


def boundary_density(frame: DensityField, margin: int = 2) -> float:
    """Largest density within ``margin`` sites of the frame edge (origin centred)."""
    c = frame.centered()
    if min(c.shape) <= 2 * margin:
        return float(c.max())
    mask = np.ones_like(c, dtype=bool)
    mask[margin:-margin, margin:-margin] = False
    return float(c[mask].max())


def folded_angle(dx, dy):
    """Angle of a displacement folded into [0, 45] degrees (0 axial, 45 diagonal)."""
    ax, ay = np.abs(dx), np.abs(dy)
    return np.degrees(np.arctan2(np.minimum(ax, ay), np.maximum(ax, ay)))


def classify_angle(angle: float, tol: float = 7.5) -> str:
    if angle <= tol:
        return "axial"
    if angle >= 45.0 - tol:
        return "diagonal"
    return "edge"


def global_maxima(frame: DensityField, rtol: float = 1e-9) -> list[Displacement]:
    """Displacements of every site within ``rtol`` of the global maximum."""
    dx, dy = frame.lattice.displacements()
    vals = np.roll(frame.values, (-frame.origin[0], -frame.origin[1]), axis=(0, 1))
    hits = np.argwhere(vals >= vals.max() * (1 - rtol))
    return [Displacement(int(dx[i, j]), int(dy[i, j])) for i, j in hits]


def front_profile(
    frame: DensityField,
    n_bins: int = 9,
    window: float = 0.25,
    floor: float = 1e-6,
) -> np.ndarray:
    """Peak density of the leading front in angular bins from axial to diagonal.

    For each bin of the folded angle the outer edge is the farthest site
    with density above ``floor * max``; the front is the shell within
    ``window`` times that radius from the edge. Returns one peak per bin,
    bin 0 on the axes and bin ``n_bins - 1`` on the diagonals.
    """
    dx, dy = frame.lattice.displacements()
    vals = np.roll(frame.values, (-frame.origin[0], -frame.origin[1]), axis=(0, 1))
    R = np.hypot(dx, dy)
    bins = np.minimum((folded_angle(dx, dy) / 45.0 * n_bins).astype(int), n_bins - 1)
    live = vals >= floor * vals.max()
    out = np.zeros(n_bins)
    for b in range(n_bins):
        in_bin = (bins == b) & (R > 0)
        edge = R[in_bin & live]
        if edge.size == 0:
            continue
        out[b] = vals[in_bin & (R >= (1 - window) * edge.max())].max()
    return out


def classify_front(frame: DensityField, contrast: float = 2.0, **kwargs) -> str:
    """Where the leading front concentrates: 'axial', 'diagonal' or 'edge'.

    A front counts as piled at corners only when its strongest bin beats
    the weakest by ``contrast``; otherwise it is spread along the edges.
    """
    prof = front_profile(frame, **kwargs)
    if not prof.max() > 0:
        raise EmptyFrameError("empty frame")
    if prof.max() < contrast * prof[prof > 0].min():
        return "edge"
    b = int(np.argmax(prof))
    if b == 0:
        return "axial"
    if b == len(prof) - 1:
        return "diagonal"
    return "edge"
