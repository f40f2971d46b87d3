"""
Grids, trapezoid quadrature, sampled sections and the finite-difference oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import product as cartesian
from typing import Callable, Sequence

import numpy as np

from .errors import NumericInstabilityError, ParseError, ShapeMismatchError
from .expr import BaseVar, JetVar, evaluate_array
from .jet import JetContext, JetPoint, Section, multi_indices, prolong

__all__ = [
    "Grid", "parse_grid", "quadrature", "SampledSection", "JetSample", "sample",
    "jet_sample", "symbolic_jet_arrays", "central_difference", "richardson",
    "fd_derivative", "fd_gateaux", "DEFAULT_STEPS", "DEFAULT_RTOL",
]

DEFAULT_STEPS = (1e-2, 1e-3)
DEFAULT_RTOL = 1e-3
DEFAULT_ATOL = 1e-9


@dataclass(frozen=True)
class Grid:
    """Tensor-product grid; ``axes`` holds one ``(lower, upper, count)`` per axis."""

    axes: tuple

    def __post_init__(self):
        axes = tuple((float(lo), float(hi), int(count)) for lo, hi, count in self.axes)
        if not axes:
            raise ValueError("a grid needs at least one axis")
        for lo, hi, count in axes:
            if count < 2 or not lo < hi:
                raise ValueError("each grid axis needs lower < upper and at least 2 points")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def uniform(cls, n: int, count: int, lo: float = 0.0, hi: float = 1.0) -> "Grid":
        return cls(tuple((lo, hi, count) for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(count for _, _, count in self.axes)

    @property
    def spacing(self) -> tuple:
        return tuple((hi - lo) / (count - 1) for lo, hi, count in self.axes)

    @property
    def volume(self) -> float:
        return math.prod(hi - lo for lo, hi, _ in self.axes)

    @property
    def bounds(self) -> tuple:
        return tuple((lo, hi) for lo, hi, _ in self.axes)

    @cached_property
    def coordinates(self) -> tuple:
        return tuple(np.linspace(lo, hi, count) for lo, hi, count in self.axes)

    @cached_property
    def mesh(self) -> tuple:
        return tuple(np.meshgrid(*self.coordinates, indexing="ij"))

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.ones(())
        for (lo, hi, count), h in zip(self.axes, self.spacing):
            axis = np.full(count, h)
            axis[0] = axis[-1] = h / 2
            w = np.multiply.outer(w, axis)
        return w

    def environment(self) -> dict:
        return {BaseVar(i): x for i, x in enumerate(self.mesh)}

    def points(self):
        """All grid points in C order."""
        return [tuple(float(c[i]) for c in self.mesh) for i in np.ndindex(*self.shape)]

    def inside(self, chart, slack: float = 1e-12) -> bool:
        return len(chart) == self.n and all(
            clo - slack <= lo and hi <= chart_hi + slack
            for (lo, hi, _), (clo, chart_hi) in zip(self.axes, chart))

    def refined(self) -> "Grid":
        """The grid with every spacing halved."""
        return Grid(tuple((lo, hi, 2 * count - 1) for lo, hi, count in self.axes))

    @property
    def spec(self) -> str:
        return ",".join(f"{lo:g}:{hi:g}:{count}" for lo, hi, count in self.axes)


def parse_grid(text: str) -> Grid:
    """Parse ``lo:hi:count[,lo:hi:count...]``."""
    axes = []
    for part in text.split(","):
        fields = part.strip().split(":")
        if len(fields) != 3:
            raise ParseError("grid axes are written lo:hi:count", text, text.find(part))
        try:
            axes.append((float(fields[0]), float(fields[1]), int(fields[2])))
        except ValueError:
            raise ParseError(f"bad grid axis {part!r}", text, text.find(part)) from None
    try:
        return Grid(tuple(axes))
    except ValueError as exc:
        raise ParseError(str(exc), text, 0) from None


def quadrature(values, grid: Grid) -> float:
    """Trapezoid rule; the weighted sum is formed with exactly rounded summation."""
    values = np.asarray(values, dtype=float)
    if values.shape != grid.shape:
        values = np.broadcast_to(values, grid.shape) if values.ndim == 0 else values
        if values.shape != grid.shape:
            raise ShapeMismatchError(f"values of shape {values.shape} on grid {grid.shape}")
    return math.fsum((values * grid.weights).ravel().tolist())


@dataclass(frozen=True, eq=False)
class SampledSection:
    """Fiber values on a grid; ``values`` has shape ``(m,) + grid.shape``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != self.grid.n + 1 or values.shape[1:] != self.grid.shape:
            raise ShapeMismatchError(f"sample of shape {values.shape} on grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("sampled values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    def _other(self, other):
        if not isinstance(other, SampledSection) or other.grid != self.grid:
            raise ShapeMismatchError("sampled sections on different grids")
        return other.values

    def __add__(self, other):
        return SampledSection(self.grid, self.values + self._other(other))

    def __sub__(self, other):
        return SampledSection(self.grid, self.values - self._other(other))

    def __mul__(self, c):
        return SampledSection(self.grid, float(c) * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return SampledSection(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class JetSample:
    """Jet coordinates on a grid: ``arrays[u^k_I]`` has the grid's shape."""

    grid: Grid
    context: JetContext
    arrays: dict

    def point(self, index) -> JetPoint:
        base = tuple(float(c[index]) for c in self.grid.mesh)
        return JetPoint(self.context, base,
                        tuple(float(self.arrays[v][index]) for v in self.context.jet_variables))

    def column(self, v: JetVar) -> np.ndarray:
        return self.arrays[v]


def _check_chart(section: Section, grid: Grid):
    if section.n != grid.n:
        raise ShapeMismatchError(f"section over R^{section.n} on a {grid.n}-dimensional grid")
    if not grid.inside(section.chart):
        raise ValueError(f"grid {grid.spec} leaves the chart {section.chart}")


def sample(s: Section, grid: Grid) -> SampledSection:
    """Pointwise evaluation of a section on a grid."""
    _check_chart(s, grid)
    env = grid.environment()
    values = np.stack([evaluate_array(c, env, grid.shape) for c in s.components]) \
        if s.m else np.zeros((0,) + grid.shape)
    return SampledSection(grid, values)


def symbolic_jet_arrays(s: Section, r: int, grid: Grid) -> dict:
    """Exact jet coordinates of ``s`` on the grid, via symbolic prolongation."""
    _check_chart(s, grid)
    env = grid.environment()
    js = prolong(s, r)
    return {v: evaluate_array(e, env, grid.shape) for v, e in js.items()}


@lru_cache(maxsize=256)
def _stencil_weights(offsets: tuple, k: int) -> np.ndarray:
    """Weights w with sum_j w_j f(z_j) = f^(k)(0) + O(h^(len - k)) for unit spacing."""
    z = np.asarray(offsets, dtype=float)
    size = len(z)
    vander = np.array([z ** p / math.factorial(p) for p in range(size)])
    rhs = np.zeros(size)
    rhs[k] = 1.0
    return np.linalg.solve(vander, rhs)


@lru_cache(maxsize=256)
def _derivative_matrix(count: int, h: float, k: int) -> np.ndarray:
    """Second-order k-th derivative on ``count`` equispaced points.

    Central stencils of 2*ceil(k/2)+1 points inside, one-sided stencils of
    k+2 points where the central one does not fit.
    """
    half = (k + 1) // 2
    width = k + 2
    if count < width:
        raise ValueError(f"{count} grid points are too few for derivatives of order {k}")
    D = np.zeros((count, count))
    for i in range(count):
        if half <= i < count - half:
            idx = np.arange(i - half, i + half + 1)
        else:
            start = 0 if i < half else count - width
            idx = np.arange(start, start + width)
        D[i, idx] = _stencil_weights(tuple(int(j) for j in idx - i), k)
    D /= h ** k
    D.setflags(write=False)
    return D


def _along_axis(values: np.ndarray, D: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(D, values, axes=([1], [axis])), 0, axis)


def _fd_jets(values: np.ndarray, grid: Grid, r: int) -> dict:
    out = {}
    for k in range(values.shape[0]):
        for I in multi_indices(grid.n, r):
            arr = values[k]
            for axis, e in enumerate(I):
                if e:
                    D = _derivative_matrix(grid.shape[axis], grid.spacing[axis], e)
                    arr = _along_axis(arr, D, axis)
            out[JetVar(k, I)] = arr
    return out


def jet_sample(s, r: int, grid: Grid | None = None) -> JetSample:
    """Finite-difference jets: second-order central stencils, one-sided at edges.

    ``s`` is a :class:`Section` (sampled first) or a :class:`SampledSection`.
    Mixed indices apply the per-axis stencils one axis at a time.
    """
    if isinstance(s, Section):
        if grid is None:
            raise ValueError("a grid is needed to sample a symbolic section")
        s = sample(s, grid)
    ctx = JetContext(s.grid.n, s.m, r, s.grid.bounds)
    return JetSample(s.grid, ctx, _fd_jets(s.values, s.grid, r))


# ---------------------------------------------------------------------------
# finite differences


def central_difference(f: Callable[[tuple], float], k: int, h: float) -> float:
    """Mixed k-th central difference of ``f`` at the origin of R^k."""
    total = []
    for signs in cartesian((1, -1), repeat=k):
        total.append(math.prod(signs) * f(tuple(h * e for e in signs)))
    return math.fsum(total) / (2 * h) ** k


def richardson(values: Sequence[float], steps: Sequence[float], power: int = 2) -> float:
    """Extrapolate estimates with error ~ h^power to h -> 0 (Neville tableau)."""
    table = list(values)
    for level in range(1, len(table)):
        for j in range(len(table) - 1, level - 1, -1):
            ratio = (steps[j - level] / steps[j]) ** power
            table[j] = (ratio * table[j] - table[j - 1]) / (ratio - 1)
    return table[-1]


def fd_derivative(f: Callable[[tuple], float], k: int = 1, steps=DEFAULT_STEPS,
                  rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                  case: str = "") -> float:
    """Mixed k-th derivative of ``f`` at 0 by central differences plus Richardson.

    The step disagreement is the Richardson error estimate of the finest step,
    ``|R - D(h_min)|``; it must stay below ``rtol * max(1, |R|, |D(h_min)|) + atol``
    or :class:`NumericInstabilityError` is raised.
    """
    if k == 0:
        return float(f(()))
    estimates = [central_difference(f, k, h) for h in steps]
    value = richardson(estimates, steps)
    finest = estimates[int(min(range(len(steps)), key=lambda j: steps[j]))]
    error = abs(value - finest)
    if not all(math.isfinite(e) for e in estimates) or \
            error > rtol * max(1.0, abs(value), abs(finest)) + atol:
        raise NumericInstabilityError(
            f"finite differences disagree across steps {list(steps)}: {estimates}",
            case or "directional derivative")
    return value


def fd_gateaux(F: Callable, s, t, steps=DEFAULT_STEPS, rtol: float = DEFAULT_RTOL,
               atol: float = DEFAULT_ATOL) -> float:
    """d/dh F(s + h t) at h = 0 by central differences with Richardson.

    ``s`` and ``t`` only need to support ``+`` and scalar ``*``.
    """
    return fd_derivative(lambda c: F(s + c[0] * t), 1, steps, rtol, atol, "gateaux")
