"""Radial discretization of R^N for N = 1..4.

A radial function is stored by its nodal values on the uniform grid
r_i = i*h, i = 0..M-1, h = R/(M-1).  All integrals use a finite-volume
rule: node i owns the spherical shell between r_i - h/2 and r_i + h/2
(clipped to [0, R]), whose exact volume is its quadrature weight.  The
gradient energy is a sum over cell faces of squared difference quotients,
and the Laplacian is built from the same face fluxes.  With these choices
the discrete Laplacian is exactly the variational derivative of the
discrete Dirichlet energy, so discrete critical points of the energy
functionals are discrete solutions of the Euler-Lagrange equations.

For N = 1 the rule is the composite trapezoid rule on [0, R] (doubled to
cover both half-lines).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import PchipInterpolator

from .errors import GridMismatchError, ParameterError

#: Surface area of the unit sphere in R^N (for N = 1 the two points +-1).
SURFACE_MEASURE = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi, 4: 2.0 * math.pi**2}

MIN_POINTS = 16


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial grid on [0, radius] with ``points`` nodes."""

    dim: int
    radius: float
    points: int

    def __post_init__(self) -> None:
        if self.dim not in SURFACE_MEASURE:
            raise ParameterError(f"dim must be 1, 2, 3 or 4, got {self.dim!r}")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ParameterError(f"radius must be a positive finite number, got {self.radius!r}")
        if int(self.points) != self.points or self.points < MIN_POINTS:
            raise ParameterError(f"points must be an integer >= {MIN_POINTS}, got {self.points!r}")
        object.__setattr__(self, "points", int(self.points))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def spacing(self) -> float:
        return self.radius / (self.points - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        r = np.linspace(0.0, self.radius, self.points)
        r.setflags(write=False)
        return r

    @property
    def omega(self) -> float:
        return SURFACE_MEASURE[self.dim]

    @cached_property
    def volumes(self) -> np.ndarray:
        """Exact shell volume owned by each node."""
        h = self.spacing
        lo = np.clip(self.nodes - 0.5 * h, 0.0, self.radius)
        hi = np.clip(self.nodes + 0.5 * h, 0.0, self.radius)
        n = self.dim
        w = self.omega / n * (hi**n - lo**n)
        w.setflags(write=False)
        return w

    @cached_property
    def face_areas(self) -> np.ndarray:
        """Sphere area at the midpoints r_i + h/2, i = 0..M-2."""
        faces = (np.arange(self.points - 1) + 0.5) * self.spacing
        a = self.omega * faces ** (self.dim - 1)
        a.setflags(write=False)
        return a

    @cached_property
    def stiffness(self) -> sp.csr_matrix:
        """Symmetric matrix K with u.K.u equal to the discrete Dirichlet energy.

        The discrete Laplacian is -K u / volumes.
        """
        c = self.face_areas / self.spacing
        diag = np.zeros(self.points)
        diag[:-1] += c
        diag[1:] += c
        k = sp.diags([-c, diag, -c], [-1, 0, 1], format="csr")
        return k

    def scaled(self, factor: float) -> "RadialGrid":
        """Same number of nodes, radius multiplied by ``factor``."""
        return RadialGrid(self.dim, self.radius * factor, self.points)


def make_grid(dim: int, radius: float, points: int) -> RadialGrid:
    """Build a validated :class:`RadialGrid`."""
    return RadialGrid(dim, radius, points)


@dataclass(frozen=True)
class RadialField:
    """Nodal values of a radial function on ``grid``; immutable."""

    grid: RadialGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.shape != (self.grid.points,):
            raise ParameterError(
                f"field has shape {vals.shape}, grid expects ({self.grid.points},)"
            )
        if not np.all(np.isfinite(vals)):
            raise ParameterError("field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RadialField):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def from_function(cls, grid: RadialGrid, fn) -> "RadialField":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float))

    @classmethod
    def zeros(cls, grid: RadialGrid) -> "RadialField":
        return cls(grid, np.zeros(grid.points))

    def with_values(self, values) -> "RadialField":
        return RadialField(self.grid, values)

    def is_zero(self) -> bool:
        return not np.any(self.values)


def require_same_grid(*fields: RadialField) -> RadialGrid:
    """Return the common grid or raise :class:`GridMismatchError`."""
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid is not grid and f.grid != grid:
            raise GridMismatchError(f"grid mismatch: {grid} vs {f.grid}")
    return grid


def integrate(f: RadialField) -> float:
    """Integral of the radial function over R^N."""
    return float(np.dot(f.grid.volumes, f.values))


def lp_norm_pow(u: RadialField, p: float) -> float:
    """||u||_p^p."""
    if not p >= 1:
        raise ParameterError(f"exponent must be >= 1, got {p!r}")
    return float(np.dot(u.grid.volumes, np.abs(u.values) ** p))


def grad_norm_sq(u: RadialField) -> float:
    """||grad u||_2^2 from face difference quotients."""
    g = u.grid
    d = np.diff(u.values)
    return float(np.dot(g.face_areas, d * d) / g.spacing)


def apply_laplacian(u: RadialField) -> RadialField:
    """Discrete radial Laplacian; zero flux through r = 0 and r = R."""
    g = u.grid
    return RadialField(g, -(g.stiffness @ u.values) / g.volumes)


def mixed_integral(u: RadialField, v: RadialField, r1: float, r2: float) -> float:
    """Integral of |u|^r1 |v|^r2."""
    g = require_same_grid(u, v)
    return float(np.dot(g.volumes, np.abs(u.values) ** r1 * np.abs(v.values) ** r2))


def even_interpolant(u: RadialField) -> PchipInterpolator:
    """Monotone cubic interpolant of the even extension of u to [-R, R]."""
    r = u.grid.nodes
    x = np.concatenate([-r[:0:-1], r])
    y = np.concatenate([u.values[:0:-1], u.values])
    return PchipInterpolator(x, y, extrapolate=False)


def dilate_field(u: RadialField, t: float) -> RadialField:
    """Mass-preserving dilation (t*u)(r) = t^{N/2} u(t r), zero beyond R."""
    if not (math.isfinite(t) and t > 0):
        raise ParameterError(f"dilation factor must be positive, got {t!r}")
    if t == 1.0:
        return u
    g = u.grid
    s = g.nodes * t
    vals = np.zeros(g.points)
    inside = s <= g.radius
    vals[inside] = even_interpolant(u)(s[inside])
    return RadialField(g, t ** (g.dim / 2.0) * np.nan_to_num(vals))
