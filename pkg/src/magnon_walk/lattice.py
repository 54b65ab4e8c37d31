"""Square lattice, momentum grid and the ferromagnetic J1-J2 magnon dispersion.

Energies are in units of |J1| (or |J2| when J1 vanishes), the lattice
constant is 1 and hbar = 1, so times come out in units of hbar/|J1|.
The dispersion is

    omega(k) = 2 [J1 (1 - gamma1(k)) + J2 (1 - gamma2(k))]

with gamma1 = (cos kx + cos ky)/2 and gamma2 = (cos(kx+ky) + cos(kx-ky))/2.
For J1, J2 < 0 this is non-positive; every observable built on it only
depends on omega up to a global sign, so the formula is kept as is.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ValidationError

__all__ = [
    "CouplingParams",
    "LatticeSpec",
    "KGrid",
    "Displacement",
    "gamma1",
    "gamma2",
    "dispersion",
    "group_velocity",
    "grid_dispersion",
    "NN_VECTORS",
    "NNN_VECTORS",
]

# Neighbour displacement vectors of the square lattice.
NN_VECTORS = ((1, 0), (-1, 0), (0, 1), (0, -1))
NNN_VECTORS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


@dataclass(frozen=True)
class CouplingParams:
    """Exchange constants of the J1-J2 model.

    ``j1`` couples nearest neighbours, ``j2`` the diagonal (next-nearest)
    neighbours. Both must be non-positive for the ferromagnetic APIs; the
    bare dispersion accepts any sign.
    """

    j1: float = -1.0
    j2: float = 0.0

    @property
    def scale(self) -> float:
        """Reference energy scale: |j1|, or |j2| when j1 is zero."""
        if self.j1 != 0.0:
            return abs(self.j1)
        if self.j2 != 0.0:
            return abs(self.j2)
        raise ValidationError("both couplings are zero; no energy scale")

    def require_ferromagnetic(self) -> "CouplingParams":
        if not (np.isfinite(self.j1) and np.isfinite(self.j2)):
            raise ValidationError(f"couplings must be finite, got {self}")
        if self.j1 > 0 or self.j2 > 0:
            raise ValidationError(
                f"only ferromagnetic couplings (j1 <= 0, j2 <= 0) are supported, got {self}"
            )
        self.scale  # noqa: B018 -- raises when both vanish
        return self


class Displacement(NamedTuple):
    """Site separation r = r_site - r_0 in lattice units."""

    dx: int
    dy: int

    @property
    def norm(self) -> float:
        return float(np.hypot(self.dx, self.dy))


@dataclass(frozen=True)
class KGrid:
    """Momenta k = (2 pi p / nx, 2 pi q / ny), stored as (nx, ny) arrays."""

    kx: np.ndarray
    ky: np.ndarray

    @property
    def size(self) -> int:
        return self.kx.size

    def pairs(self) -> np.ndarray:
        """All momenta as an (N, 2) array, x index running slowest."""
        return np.column_stack([self.kx.ravel(), self.ky.ravel()])


@dataclass(frozen=True)
class LatticeSpec:
    """Periodic nx-by-ny square lattice.

    Sites are labelled (m, n) with 0 <= m < nx, 0 <= n < ny. Arrays over
    sites have shape (nx, ny) and the flat site index is ``m * ny + n``.
    """

    nx: int
    ny: int = 1

    def __post_init__(self):
        for name in ("nx", "ny"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValidationError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @classmethod
    def square(cls, n: int) -> "LatticeSpec":
        return cls(n, n)

    @property
    def n_sites(self) -> int:
        return self.nx * self.ny

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def center(self) -> tuple[int, int]:
        return (self.nx // 2, self.ny // 2)

    def site_index(self, m: int, n: int) -> int:
        return (m % self.nx) * self.ny + (n % self.ny)

    def site_coords(self, index: int) -> tuple[int, int]:
        return divmod(index, self.ny)

    def shift(self, site: tuple[int, int], d: tuple[int, int]) -> tuple[int, int]:
        return ((site[0] + d[0]) % self.nx, (site[1] + d[1]) % self.ny)

    def kgrid(self) -> KGrid:
        kx = 2 * np.pi * np.arange(self.nx) / self.nx
        ky = 2 * np.pi * np.arange(self.ny) / self.ny
        KX, KY = np.meshgrid(kx, ky, indexing="ij")
        return KGrid(KX, KY)

    def displacements(self) -> tuple[np.ndarray, np.ndarray]:
        """Minimal-image displacement of every site from site (0, 0).

        Returns integer arrays (dx, dy) of shape (nx, ny).
        """
        mx = np.arange(self.nx)
        my = np.arange(self.ny)
        mx = np.where(mx > self.nx // 2, mx - self.nx, mx)
        my = np.where(my > self.ny // 2, my - self.ny, my)
        return np.meshgrid(mx, my, indexing="ij")


def gamma1(kx, ky):
    return 0.5 * (np.cos(kx) + np.cos(ky))


def gamma2(kx, ky):
    return 0.5 * (np.cos(kx + ky) + np.cos(kx - ky))


def dispersion(kx, ky, params: CouplingParams):
    """Magnon energy omega(k); broadcasts over array-valued momenta."""
    return 2.0 * (params.j1 * (1.0 - gamma1(kx, ky)) + params.j2 * (1.0 - gamma2(kx, ky)))


def group_velocity(kx, ky, params: CouplingParams):
    """Analytic gradient (d omega/d kx, d omega/d ky)."""
    j1, j2 = params.j1, params.j2
    vx = j1 * np.sin(kx) + j2 * (np.sin(kx + ky) + np.sin(kx - ky))
    vy = j1 * np.sin(ky) + j2 * (np.sin(kx + ky) - np.sin(kx - ky))
    return vx, vy


def grid_dispersion(lattice: LatticeSpec, params: CouplingParams) -> np.ndarray:
    """omega on the lattice's momentum grid, shape (nx, ny)."""
    k = lattice.kgrid()
    return dispersion(k.kx, k.ky, params)
