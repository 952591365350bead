"""Truncated cylinder mesh, field containers and the modified Laplacians.

The cylinder {r < 1} is cut to a z-periodic slab of length ``z_len``.
Radial nodes are cell centred, ``r_i = (i + 1/2) hr``, so no node sits on
the axis or on the wall. Ghost values close every stencil:

* axis: parity reflection, ``f(-r) = +f(r)`` for even fields and ``-f(r)``
  for odd ones;
* wall: Dirichlet ghost for a zero wall value. ``apply_L5`` uses the linear
  ghost ``-f[nr-1]``, which keeps the transport matrix monotone;
  ``apply_Lstream`` uses the quadratic ghost ``-2 f[nr-1] + f[nr-2]/3`` so
  that velocities recovered from the stream function stay second order up
  to the wall.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .errors import ConfigurationError, ParityError


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"


@dataclass(frozen=True, eq=False)
class Grid:
    nr: int
    nz: int
    z_len: float
    hr: float = field(init=False)
    hz: float = field(init=False)
    r_nodes: np.ndarray = field(init=False, repr=False)
    z_nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        hr = 1.0 / self.nr
        hz = self.z_len / self.nz
        r = (np.arange(self.nr) + 0.5) * hr
        z = np.arange(self.nz) * hz
        r.flags.writeable = False
        z.flags.writeable = False
        object.__setattr__(self, "hr", hr)
        object.__setattr__(self, "hz", hz)
        object.__setattr__(self, "r_nodes", r)
        object.__setattr__(self, "z_nodes", z)

    @property
    def shape(self):
        return (self.nr, self.nz)

    @property
    def hmin(self):
        return min(self.hr, self.hz)

    @property
    def r(self):
        """Radial nodes as a column, for broadcasting against (nr, nz) arrays."""
        return self.r_nodes[:, None]

    @property
    def z(self):
        return self.z_nodes[None, :]

    def mesh(self):
        return np.meshgrid(self.r_nodes, self.z_nodes, indexing="ij")

    def cell_weights(self):
        """Quadrature weights 2*pi*r_i*hr*hz, shape (nr, 1)."""
        return (2.0 * np.pi * self.hr * self.hz) * self.r

    def key(self):
        return (self.nr, self.nz, float(self.z_len))

    def __eq__(self, other):
        return isinstance(other, Grid) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


def build_grid(nr: int, nz: int, z_len: float) -> Grid:
    """Validated constructor; ``nr`` and ``nz`` must be at least 4."""
    for name, n in (("nr", nr), ("nz", nz)):
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise ConfigurationError(f"must be an integer, got {n!r}", key=f"grid.{name}")
        if n < 4:
            raise ConfigurationError(f"must be >= 4, got {n}", key=f"grid.{name}")
    z_len = float(z_len)
    if not np.isfinite(z_len) or z_len <= 0.0:
        raise ConfigurationError(f"must be a positive real, got {z_len}", key="grid.z_len")
    return Grid(int(nr), int(nz), z_len)


@dataclass(eq=False)
class ScalarField:
    grid: Grid
    values: np.ndarray
    parity: Parity

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} does not match grid {self.grid.shape}")
        self.parity = Parity(self.parity)

    @classmethod
    def zeros(cls, grid, parity):
        return cls(grid, np.zeros(grid.shape), parity)

    @classmethod
    def from_function(cls, grid, fn, parity):
        rr, zz = grid.mesh()
        return cls(grid, np.broadcast_to(fn(rr, zz), grid.shape).copy(), parity)

    def copy(self):
        return ScalarField(self.grid, self.values.copy(), self.parity)

    def __mul__(self, c):
        return ScalarField(self.grid, self.values * c, self.parity)

    __rmul__ = __mul__


@dataclass(eq=False)
class VelocityField:
    ur: ScalarField
    uz: ScalarField

    def __post_init__(self):
        if self.ur.grid != self.uz.grid:
            raise ValueError("velocity components live on different grids")
        if self.ur.parity is not Parity.ODD or self.uz.parity is not Parity.EVEN:
            raise ParityError("velocity needs odd u^r and even u^z")

    @property
    def grid(self):
        return self.ur.grid

    @classmethod
    def from_arrays(cls, grid, ur, uz):
        return cls(ScalarField(grid, ur, Parity.ODD), ScalarField(grid, uz, Parity.EVEN))

    @classmethod
    def zeros(cls, grid):
        return cls.from_arrays(grid, np.zeros(grid.shape), np.zeros(grid.shape))

    def magnitude(self):
        return np.hypot(self.ur.values, self.uz.values)

    def __mul__(self, c):
        return VelocityField(self.ur * c, self.uz * c)

    __rmul__ = __mul__


def _require(f: ScalarField, parity: Parity, op: str):
    if f.parity is not parity:
        raise ParityError(f"{op} needs a {parity.value} field, got {f.parity.value}")


def apply_L5(f: ScalarField) -> ScalarField:
    """d_rr + (3/r) d_r + d_zz: the radial part of the 5-D Laplacian."""
    _require(f, Parity.EVEN, "apply_L5")
    g = f.grid
    out = kernels.radial_operator(f.values, g.r_nodes, g.hr, g.hz, 3.0, 0.0, 1.0, 1)
    return ScalarField(g, out, Parity.EVEN)


def apply_Lstream(f: ScalarField) -> ScalarField:
    """d_rr + (1/r) d_r - 1/r^2 + d_zz acting on the azimuthal stream component (quadratic wall ghost)."""
    _require(f, Parity.ODD, "apply_Lstream")
    g = f.grid
    out = kernels.radial_operator(f.values, g.r_nodes, g.hr, g.hz, 1.0, 1.0, -1.0, 2)
    return ScalarField(g, out, Parity.ODD)


def quadrature(f: ScalarField | np.ndarray, integrand: Callable[[np.ndarray], np.ndarray] | None = None,
               grid: Grid | None = None) -> float:
    """Midpoint rule for the volume integral 2*pi * int int integrand(f) r dr dz.

    The reduction order is fixed (numpy pairwise sum over a C-ordered array),
    so a given configuration always gives the same bits.
    """
    if isinstance(f, ScalarField):
        grid, vals = f.grid, f.values
    else:
        vals = np.asarray(f, dtype=float)
        if grid is None:
            raise TypeError("a grid is required when integrating a bare array")
    if integrand is not None:
        vals = integrand(vals)
    return float(np.sum(np.ascontiguousarray(vals * grid.cell_weights())))


def support_margin(f: ScalarField, threshold: float = 1e-3) -> float:
    """Smallest distance, as a fraction of ``z_len``, between the support and z = 0 (mod z_len).

    The support is every axial column where ``|f|`` exceeds ``threshold``
    times its maximum. Returns 0.5 for a zero field.
    """
    col = np.max(np.abs(f.values), axis=0)
    peak = col.max()
    if peak == 0.0:
        return 0.5
    z = f.grid.z_nodes[col > threshold * peak] / f.grid.z_len
    return float(np.min(np.minimum(z, 1.0 - z)))


def d_r(values: np.ndarray, grid: Grid, parity: Parity) -> np.ndarray:
    """Radial derivative: central differences, parity ghost at the axis,
    second-order one-sided difference on the wall row (no boundary value imposed)."""
    f = np.asarray(values, dtype=float)
    sign = 1.0 if Parity(parity) is Parity.EVEN else -1.0
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * grid.hr)
    out[0] = (f[1] - sign * f[0]) / (2.0 * grid.hr)
    out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * grid.hr)
    return out


def d_z(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Periodic central difference in z."""
    f = np.asarray(values, dtype=float)
    return (np.roll(f, -1, axis=1) - np.roll(f, 1, axis=1)) / (2.0 * grid.hz)
