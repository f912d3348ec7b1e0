"""Constitutive laws, grids, fluid states and isolated-mass-group data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    DeltaOutOfRange,
    DomainTooSmall,
    GammaOutOfRange,
    InvalidInput,
    InvalidSpec,
    MinExponentTooLarge,
    NegativeDensity,
    NonFiniteValue,
)

VACUUM_FRACTION = 1e-10


@dataclass(frozen=True)
class Parameters:
    """Adiabatic exponent ``gamma`` (p = rho**gamma) and viscosity exponent
    ``delta`` (mu = rho**delta)."""

    gamma: float
    delta: float

    def __post_init__(self):
        gamma, delta = float(self.gamma), float(self.delta)
        if not (math.isfinite(gamma) and math.isfinite(delta)):
            raise InvalidInput(f"exponents must be finite, got gamma={gamma}, delta={delta}")
        if gamma <= 1.0:
            raise GammaOutOfRange(f"gamma must exceed 1, got {gamma}")
        if delta <= 1.0:
            raise DeltaOutOfRange(f"delta must exceed 1 (mu = rho**delta, delta > 1), got {delta}")
        if min(gamma, delta) > 3.0:
            raise MinExponentTooLarge(
                f"admissibility 1 < min(delta, gamma) <= 3 violated: min = {min(gamma, delta)}"
            )
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "delta", delta)


def validate_parameters(gamma: float, delta: float) -> Parameters:
    """Check ``gamma > 1``, ``delta > 1`` and ``1 < min(gamma, delta) <= 3``."""
    return Parameters(gamma, delta)


def _check_density(rho):
    r = np.asarray(rho, dtype=float)
    if np.any(r < 0.0):
        raise NegativeDensity("density must be non-negative")
    return r


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def pressure(rho, params: Parameters):
    """Polytropic pressure ``rho**gamma``."""
    r = _check_density(rho)
    return _scalar_or_array(r**params.gamma)


def sound_speed(rho, params: Parameters):
    """``sqrt(gamma * rho**(gamma - 1))``; zero in vacuum since gamma > 1."""
    r = _check_density(rho)
    return _scalar_or_array(np.sqrt(params.gamma * r ** (params.gamma - 1.0)))


def viscosity(rho, params: Parameters):
    """Degenerate viscosity coefficient ``rho**delta``."""
    r = _check_density(rho)
    return _scalar_or_array(r**params.delta)


@dataclass(frozen=True)
class Grid:
    """Uniform grid of ``n_cells`` cells covering ``[x_min, x_max]``."""

    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise InvalidInput("grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise InvalidInput(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if int(self.n_cells) != self.n_cells or self.n_cells < 2:
            raise InvalidInput(f"n_cells must be an integer >= 2, got {self.n_cells}")

    @classmethod
    def symmetric(cls, half_width: float, n_cells: int) -> "Grid":
        return cls(-float(half_width), float(half_width), int(n_cells))

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @cached_property
    def centers(self) -> np.ndarray:
        c = self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx
        c.flags.writeable = False
        return c

    @property
    def faces(self) -> np.ndarray:
        return self.x_min + np.arange(self.n_cells + 1) * self.dx


def _frozen(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FluidState:
    """Cell-centred density and velocity at time ``t``.

    ``mom`` is carried alongside ``u`` so repeated steps do not round-trip
    momentum through division. Arrays are read-only.
    """

    t: float
    grid: Grid
    rho: np.ndarray
    u: np.ndarray
    rho_vac: float
    mom: np.ndarray | None = field(default=None)

    def __post_init__(self):
        rho = _frozen(self.rho)
        u = _frozen(self.u)
        n = self.grid.n_cells
        if rho.shape != (n,) or u.shape != (n,):
            raise InvalidInput(f"fields must have shape ({n},)")
        if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(u))):
            raise NonFiniteValue(f"non-finite field values at t={self.t}")
        if np.any(rho < 0.0):
            raise NegativeDensity(f"negative density at t={self.t}")
        if not self.rho_vac > 0.0:
            raise InvalidInput("rho_vac must be positive")
        mom = rho * u if self.mom is None else _frozen(self.mom)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "mom", _frozen(mom))

    @classmethod
    def _adopt(cls, t, grid, rho, u, rho_vac, mom) -> "FluidState":
        # fresh, already-validated kernel outputs: freeze in place, no copy
        obj = object.__new__(cls)
        for name, arr in (("rho", rho), ("u", u), ("mom", mom)):
            arr.setflags(write=False)
            object.__setattr__(obj, name, arr)
        object.__setattr__(obj, "t", float(t))
        object.__setattr__(obj, "grid", grid)
        object.__setattr__(obj, "rho_vac", rho_vac)
        return obj

    def at_time(self, t: float) -> "FluidState":
        return FluidState._adopt(t, self.grid, self.rho, self.u, self.rho_vac, self.mom)

    @property
    def vacuum_mask(self) -> np.ndarray:
        return self.rho < self.rho_vac

    @property
    def x(self) -> np.ndarray:
        return self.grid.centers

    @property
    def dx(self) -> float:
        return self.grid.dx

    def total_mass(self) -> float:
        return float(np.sum(self.rho) * self.grid.dx)

    def total_energy(self, params: Parameters) -> float:
        e = 0.5 * self.rho * self.u**2 + self.rho**params.gamma / (params.gamma - 1.0)
        return float(np.sum(e) * self.grid.dx)

    @classmethod
    def zeros(cls, grid: Grid, rho_vac: float = VACUUM_FRACTION, t: float = 0.0) -> "FluidState":
        z = np.zeros(grid.n_cells)
        return cls(t, grid, z, z, rho_vac)


@dataclass(frozen=True)
class IsolatedMassGroupSpec:
    """Density ``(1+|x|)**-k1`` with a vacuum annulus ``c <= |x| <= c+1`` and
    velocity ``(1+|x|)**-k2``.

    The mass group is ``A0 = (-c, c)`` inside ``B0 = (-c-1, c+1)``.
    """

    c: float
    k1: float
    k2: float

    @property
    def a0(self) -> float:
        return -self.c

    @property
    def b0(self) -> float:
        return self.c

    @property
    def A0(self) -> tuple[float, float]:
        return (-self.c, self.c)

    @property
    def B0(self) -> tuple[float, float]:
        return (-self.c - 1.0, self.c + 1.0)

    @property
    def area_A0(self) -> float:
        return 2.0 * self.c

    @property
    def u_bar(self) -> float:
        return (1.0 + self.c) ** (-self.k2)

    def validate(self, params: Parameters) -> None:
        if not self.c > 0.0:
            raise InvalidSpec(f"c must be positive, got {self.c}")
        k1_min = max(1.0, 1.0 / (params.gamma - 1.0), 1.0 / (params.delta - 1.0))
        if not self.k1 > k1_min:
            raise InvalidSpec(f"k1 must exceed max(1, 1/(gamma-1), 1/(delta-1)) = {k1_min:g}, got {self.k1}")
        if not self.k2 > 0.5:
            raise InvalidSpec(f"k2 must exceed 1/2, got {self.k2}")

    def density(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        annulus = (ax >= self.c) & (ax <= self.c + 1.0)
        return np.where(annulus, 0.0, (1.0 + ax) ** (-self.k1))

    def velocity(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        return (1.0 + ax) ** (-self.k2)


def required_half_width(spec: IsolatedMassGroupSpec, params: Parameters, t_final: float) -> float:
    """Smallest admissible truncation ``L``: signals from B0 cannot reach the
    artificial boundary before ``t_final``."""
    # both profiles peak at x = 0
    u_max = float(spec.velocity(0.0))
    c_max = float(np.sqrt(params.gamma * float(spec.density(0.0)) ** (params.gamma - 1.0)))
    return spec.c + 1.0 + (u_max + c_max) * float(t_final) + 2.0


def auto_grid(spec: IsolatedMassGroupSpec, params: Parameters, t_final: float, n_cells: int) -> Grid:
    return Grid.symmetric(required_half_width(spec, params, t_final), n_cells)


def build_isolated_mass_group(
    spec: IsolatedMassGroupSpec,
    grid: Grid,
    params: Parameters,
    t_final: float = 0.0,
) -> FluidState:
    """Sample the isolated-mass-group data pointwise at cell centres.

    Raises :class:`DomainTooSmall` when either side of the grid is closer
    than the truncation margin for ``t_final``.
    """
    spec.validate(params)
    need = required_half_width(spec, params, t_final)
    if grid.x_max < need - 1e-12 or -grid.x_min < need - 1e-12:
        raise DomainTooSmall(
            f"grid [{grid.x_min:g}, {grid.x_max:g}] narrower than required half-width {need:g}"
        )
    x = grid.centers
    rho = spec.density(x)
    u = spec.velocity(x)
    return FluidState(0.0, grid, rho, u, vacuum_threshold(rho))


def vacuum_threshold(rho0) -> float:
    """Threshold below which a cell is treated as vacuum."""
    peak = float(np.max(rho0)) if np.size(rho0) else 0.0
    return VACUUM_FRACTION * peak if peak > 0.0 else VACUUM_FRACTION
