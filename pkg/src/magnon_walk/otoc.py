"""Out-of-time-ordered correlators and butterfly velocities.

For W = S^z at r and V = S^z at the flipped site the spin-wave OTOC is

    F(t) = 1 - 8/N^2 Omega1 Omega2 + 8/N^4 (Omega1 Omega2)^2
    Omega1 = sum_k exp(i k.r) exp(+i omega_k t),   Omega2 = conj(Omega1)

i.e. F = 1 - 8u + 8u^2 with u = xi(r, t), the walk density. First-decline
times t_d of F along a lattice direction fall on a line whose inverse
slope is the butterfly velocity.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateFitError, NeverDeclinesError, ValidationError
from .lattice import CouplingParams, Displacement, LatticeSpec, grid_dispersion, group_velocity
from .walk import Direction

DEFAULT_EPSILON = 1e-3
DEFAULT_DT = 0.02
DEFAULT_FIT_WINDOW = (4.0, 12.0)
SENSITIVITY_EPSILONS = (1e-2, 1e-3, 1e-4)


@dataclass
class OtocSeries:
    separation: Displacement
    times: np.ndarray
    values: np.ndarray


@dataclass
class TdLine:
    """Least-squares line through (|r|, t_d) points; ``v_b`` is 1/slope."""

    direction: str
    points: list[tuple[float, float]]
    slope: float
    intercept: float

    @property
    def v_b(self) -> float:
        return 1.0 / self.slope


def omega_pair(r: tuple[int, int], t: float, params: CouplingParams, lattice: LatticeSpec):
    """(Omega1, Omega2) by direct summation over the momentum grid."""
    if not t >= 0:
        raise ValidationError(f"time must be non-negative, got {t}")
    k = lattice.kgrid()
    w = grid_dispersion(lattice, params)
    kr = k.kx * r[0] + k.ky * r[1]
    om1 = np.sum(np.exp(1j * kr) * np.exp(1j * w * t))
    om2 = np.sum(np.exp(-1j * kr) * np.exp(-1j * w * t))
    return complex(om1), complex(om2)


def omega_fields(t: float, params: CouplingParams, lattice: LatticeSpec):
    """Omega1 and Omega2 for every separation, indexed [dx mod nx, dy mod ny].

    Omega1 is N times an inverse FFT, Omega2 a forward FFT; they are
    computed independently so their conjugate relation stays checkable.
    """
    if not t >= 0:
        raise ValidationError(f"time must be non-negative, got {t}")
    w = grid_dispersion(lattice, params)
    om1 = lattice.n_sites * np.fft.ifft2(np.exp(1j * w * t))
    om2 = np.fft.fft2(np.exp(-1j * w * t))
    return om1, om2


def _otoc_from_omegas(om1, om2, n_sites: int):
    p = om1 * om2
    f = 1.0 - 8.0 / n_sites**2 * p + 8.0 / n_sites**4 * p * p
    resid = np.max(np.abs(np.imag(f)))
    if resid > 1e-10:
        raise ArithmeticError(f"OTOC has imaginary residue {resid:.3e}")
    return np.real(f)


def otoc(r: tuple[int, int], t: float, params: CouplingParams, lattice: LatticeSpec) -> float:
    om1, om2 = omega_pair(r, t, params, lattice)
    return float(_otoc_from_omegas(om1, om2, lattice.n_sites))


def otoc_field(t: float, params: CouplingParams, lattice: LatticeSpec) -> np.ndarray:
    """F(r, t) for all separations at once, indexed like :func:`omega_fields`."""
    return _otoc_from_omegas(*omega_fields(t, params, lattice), lattice.n_sites)


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValidationError("times must be a non-empty 1-D sequence")
    if times[0] != 0:
        raise ValidationError("time grid must start at t = 0")
    if np.any(np.diff(times) <= 0):
        raise ValidationError("times must be strictly increasing")
    return times


def otoc_series_many(
    separations: Iterable[tuple[int, int]],
    times: Sequence[float],
    params: CouplingParams,
    lattice: LatticeSpec,
) -> list[OtocSeries]:
    """OTOC series for several separations, one FFT per time sample."""
    times = _check_times(times)
    seps = [Displacement(int(d[0]), int(d[1])) for d in separations]
    idx = tuple(np.array([[d.dx % lattice.nx, d.dy % lattice.ny] for d in seps]).T)
    values = np.empty((len(seps), times.size))
    for i, t in enumerate(times):
        values[:, i] = otoc_field(t, params, lattice)[idx]
    return [OtocSeries(d, times, values[j]) for j, d in enumerate(seps)]


def otoc_series(r, times, params: CouplingParams, lattice: LatticeSpec) -> OtocSeries:
    return otoc_series_many([r], times, params, lattice)[0]


def detect_td(series: OtocSeries, epsilon: float = DEFAULT_EPSILON) -> float:
    """Earliest time with F < 1 - epsilon, linearly interpolated between samples."""
    if not epsilon > 0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    v = np.asarray(series.values)
    t = np.asarray(series.times)
    if abs(v[0] - 1.0) > 1e-6:
        raise ValidationError(f"series must start at F = 1, got {v[0]}")
    level = 1.0 - epsilon
    below = np.flatnonzero(v < level)
    if below.size == 0:
        raise NeverDeclinesError(f"OTOC at {tuple(series.separation)} never declines below {level}")
    i = below[0]
    # v[0] == 1 > level, so i >= 1
    t0, t1, f0, f1 = t[i - 1], t[i], v[i - 1], v[i]
    return float(t0 + (f0 - level) * (t1 - t0) / (f0 - f1))


def separation_along(direction: Direction, steps: int) -> Displacement:
    if direction == "axial":
        return Displacement(steps, 0)
    if direction == "diagonal":
        return Displacement(steps, steps)
    raise ValidationError(f"direction must be 'axial' or 'diagonal', got {direction!r}")


def _step_length(direction: Direction) -> float:
    return 1.0 if direction == "axial" else np.sqrt(2.0)


def steps_for_distance(direction: Direction, distance: float) -> int:
    """Lattice steps along ``direction`` for a Euclidean distance; must be exact."""
    s = distance / _step_length(direction)
    m = int(round(s))
    if abs(s - m) > 1e-9:
        raise ValidationError(f"|r| = {distance} is not a lattice point along {direction}")
    return m


def distances_in_window(direction: Direction, fit_window, lattice: LatticeSpec) -> list[float]:
    lo, hi = fit_window
    h = _step_length(direction)
    reach = min(lattice.nx, lattice.ny) // 2
    return [m * h for m in range(reach + 1) if lo - 1e-9 <= m * h <= hi + 1e-9]


def fit_td_line(direction: str, points: Sequence[tuple[float, float]]) -> TdLine:
    pts = sorted((float(r), float(t)) for r, t in points)
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if x.size < 2 or np.ptp(x) == 0:
        raise DegenerateFitError("degenerate fit: need at least two distinct |r|")
    slope, intercept = np.polyfit(x, y, 1)
    if not slope > 0:
        raise DegenerateFitError(f"non-positive t_d slope {slope:.4g}")
    return TdLine(direction, pts, float(slope), float(intercept))


def first_decline_times(
    params: CouplingParams,
    lattice: LatticeSpec,
    separations: Sequence[tuple[int, int]],
    epsilons: Sequence[float] = (DEFAULT_EPSILON,),
    dt: float = DEFAULT_DT,
    t_max: float | None = None,
) -> dict[float, list[float]]:
    """t_d for each separation and threshold; NaN where no decline by ``t_max``.

    The time grid is ``dt``-spaced up to ``t_max`` (default: twice the
    ballistic arrival time at the slowest front, plus 5).
    """
    if not dt > 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    if t_max is None:
        vmin = min(velocity_oracle(params, d) for d in ("axial", "diagonal"))
        far = max(np.hypot(*s) for s in separations)
        t_max = 2.0 * far / vmin + 5.0
    times = np.arange(0.0, t_max + 0.5 * dt, dt)
    series = otoc_series_many(separations, times, params, lattice)
    out = {}
    for eps in epsilons:
        row = []
        for s in series:
            try:
                row.append(detect_td(s, eps))
            except NeverDeclinesError:
                row.append(float("nan"))
        out[eps] = row
    return out


def butterfly_velocity(
    params: CouplingParams,
    lattice: LatticeSpec,
    direction: Direction,
    distances: Sequence[float] | None = None,
    epsilon: float = DEFAULT_EPSILON,
    fit_window: tuple[float, float] = DEFAULT_FIT_WINDOW,
    dt: float = DEFAULT_DT,
    t_max: float | None = None,
) -> TdLine:
    """Fit the t_d line along ``direction`` and return it (``.v_b`` = 1/slope).

    ``distances`` are Euclidean |r| values lying on the direction's ray
    (m for axial, m*sqrt(2) for diagonal); by default every lattice point
    inside ``fit_window`` is used.
    """
    if distances is None:
        distances = distances_in_window(direction, fit_window, lattice)
    lo, hi = fit_window
    chosen = [d for d in distances if lo - 1e-9 <= d <= hi + 1e-9]
    if len(chosen) < 3:
        raise ValidationError(f"need at least 3 distances inside the fit window {fit_window}, got {chosen}")
    if len(set(chosen)) < 2:
        raise DegenerateFitError("degenerate fit: all |r| equal")
    seps = [separation_along(direction, steps_for_distance(direction, d)) for d in chosen]
    tds = first_decline_times(params, lattice, seps, (epsilon,), dt, t_max)[epsilon]
    for s, td in zip(seps, tds):
        if np.isnan(td):
            raise NeverDeclinesError(f"OTOC at {tuple(s)} never declines below {1 - epsilon}")
    return fit_td_line(direction, list(zip(chosen, tds)))


def velocities_by_epsilon(
    params: CouplingParams,
    lattice: LatticeSpec,
    direction: Direction,
    epsilons: Sequence[float] = SENSITIVITY_EPSILONS,
    fit_window: tuple[float, float] = DEFAULT_FIT_WINDOW,
    dt: float = DEFAULT_DT,
    t_max: float | None = None,
) -> dict[float, float]:
    """v_b for several decline thresholds from one shared OTOC sweep.

    Thresholds whose t_d line cannot be fitted (a point never declines,
    or the slope is not positive) map to NaN instead of raising.
    """
    chosen = distances_in_window(direction, fit_window, lattice)
    seps = [separation_along(direction, steps_for_distance(direction, d)) for d in chosen]
    tds = first_decline_times(params, lattice, seps, epsilons, dt, t_max)
    out = {}
    for eps, row in tds.items():
        try:
            if any(np.isnan(row)):
                raise NeverDeclinesError("missing t_d")
            out[eps] = fit_td_line(direction, list(zip(chosen, row))).v_b
        except (NeverDeclinesError, DegenerateFitError):
            out[eps] = float("nan")
    return out


def velocity_oracle(params: CouplingParams, direction: Direction, n_grid: int = 720) -> float:
    """Largest group-velocity component along the direction's unit vector.

    Maximised over an ``n_grid`` x ``n_grid`` momentum grid (a multiple of 4
    so the quarter-period points are sampled exactly).
    """
    k = 2 * np.pi * np.arange(n_grid) / n_grid
    KX, KY = np.meshgrid(k, k, indexing="ij")
    vx, vy = group_velocity(KX, KY, params)
    if direction == "axial":
        v = vx
    elif direction == "diagonal":
        v = (vx + vy) / np.sqrt(2.0)
    else:
        raise ValidationError(f"direction must be 'axial' or 'diagonal', got {direction!r}")
    return float(np.max(np.abs(v)))
