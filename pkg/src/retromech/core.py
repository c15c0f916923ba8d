"""Shared substrate: uniform sample grids, grid functions, operator
directions, unit systems, and the fixed-step RK4 used by the time- and
space-domain solvers."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Direction",
    "Grid",
    "GridFunction",
    "UnitsConfig",
    "NATURAL_UNITS",
    "ToleranceConfig",
    "DEFAULT_TOLERANCES",
    "UnstableIntegrationError",
    "integrate_second_order",
]


class Direction(enum.Enum):
    """Orientation of a one-sided operator: sweeping forward from the left
    endpoint (causal) or backward from the right endpoint (retrocausal)."""

    CAUSAL = "causal"
    RETROCAUSAL = "retrocausal"


@dataclass(frozen=True)
class Grid:
    """Uniform lattice of n samples on the closed interval [a, b]."""

    a: float
    b: float
    n: int

    def __post_init__(self) -> None:
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise ValueError("grid endpoints must be finite")
        if not self.b > self.a:
            raise ValueError(f"grid needs b > a, got a={self.a}, b={self.b}")
        if self.n < 2:
            raise ValueError(f"grid needs n >= 2, got n={self.n}")

    @property
    def h(self) -> float:
        """Sample spacing (b - a) / (n - 1)."""
        return (self.b - self.a) / (self.n - 1)

    def points(self) -> np.ndarray:
        """Abscissae a + i*h for i = 0 .. n-1."""
        return self.a + np.arange(self.n) * self.h

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real- or complex-valued samples living on a :class:`Grid`.

    Samples are copied and frozen on construction, so instances are safe
    to share across threads.
    """

    grid: Grid
    samples: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.samples, copy=True)
        if arr.dtype.kind not in "fc":
            arr = arr.astype(np.float64)
        if arr.ndim != 1 or arr.shape[0] != self.grid.n:
            raise ValueError(f"expected {self.grid.n} samples, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "GridFunction":
        """Sample a vectorized callable on the grid points."""
        return cls(grid, np.asarray(fn(grid.points())))

    @property
    def is_complex(self) -> bool:
        return self.samples.dtype.kind == "c"


@dataclass(frozen=True)
class UnitsConfig:
    """Physical constants entering the wave equations; natural units by
    default."""

    hbar: float = 1.0
    mass: float = 1.0
    c_light: float = 1.0

    def __post_init__(self) -> None:
        for name in ("hbar", "mass", "c_light"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value}")


NATURAL_UNITS = UnitsConfig()


@dataclass(frozen=True)
class ToleranceConfig:
    """Default numeric tolerances shared by the operators and the built-in
    verification checks."""

    linearity_abs: float = 1e-10
    power_law_rel: float = 1e-2
    # fraction of the interval to skip next to the singular endpoint when
    # asserting pointwise accuracy
    interior_margin: float = 0.1
    gl_min_order: float = 0.9
    reflection_rel: float = 1e-2
    semigroup_rel: float = 2e-2
    gamma_rel: float = 1e-10
    # start-value check for the half-order composition
    boundary_rtol: float = 1e-8
    # relative band around zero discriminant treated as critical damping
    critical_band: float = 1e-12


DEFAULT_TOLERANCES = ToleranceConfig()


class UnstableIntegrationError(RuntimeError):
    """The RK4 amplitude guard tripped; carries the offending step."""

    def __init__(self, message: str, step: int, t: float, value: float):
        super().__init__(message)
        self.step = step
        self.t = t
        self.value = value


def integrate_second_order(accel, y0, v0, grid: Grid, *, backward: bool = False,
                           amplitude_limit: float | None = None):
    """Classical fixed-step RK4 for y'' = accel(y, y') on a uniform grid.

    Marches forward from ``grid.a`` (or backward from ``grid.b`` when
    ``backward`` is set) and returns ``(y, v)`` sample arrays in forward
    grid order. ``amplitude_limit`` aborts with
    :class:`UnstableIntegrationError` as soon as ``|y|`` exceeds it, so a
    blow-up fails loudly instead of returning garbage.
    """
    n = grid.n
    h = -grid.h if backward else grid.h
    is_complex = isinstance(y0, complex) or isinstance(v0, complex)
    dtype = np.complex128 if is_complex else np.float64
    ys = np.empty(n, dtype=dtype)
    vs = np.empty(n, dtype=dtype)
    if is_complex:
        y, v = complex(y0), complex(v0)
    else:
        y, v = float(y0), float(v0)
    start = n - 1 if backward else 0
    ys[start] = y
    vs[start] = v
    t0 = grid.b if backward else grid.a
    indices = range(n - 1, 0, -1) if backward else range(n - 1)
    for step, i in enumerate(indices, start=1):
        a1 = accel(y, v)
        y2 = y + 0.5 * h * v
        v2 = v + 0.5 * h * a1
        a2 = accel(y2, v2)
        y3 = y + 0.5 * h * v2
        v3 = v + 0.5 * h * a2
        a3 = accel(y3, v3)
        y4 = y + h * v3
        v4 = v + h * a3
        a4 = accel(y4, v4)
        y = y + h * (v + 2.0 * v2 + 2.0 * v3 + v4) / 6.0
        v = v + h * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0
        target = i - 1 if backward else i + 1
        ys[target] = y
        vs[target] = v
        if amplitude_limit is not None and abs(y) > amplitude_limit:
            t = t0 + step * h
            raise UnstableIntegrationError(
                f"|y| = {abs(y):.3e} exceeded the stability guard "
                f"{amplitude_limit:.3e} at t = {t:.6g} (step {step})",
                step=step, t=t, value=float(abs(y)),
            )
    return ys, vs
