"""Damped oscillator pair.

The dissipative equation m q'' + C q' + k q = 0 is marched forward from
initial data at the left end of the grid; its anti-damped mirror
m q'' - C q' + k q = 0 is posed as a terminal-value problem at the right
end and marched backward, which is the numerically stable direction for
it. Reversing a forward solution in time solves the mirror equation, so
the two trajectories describe one event viewed in opposite directions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_TOLERANCES,
    Grid,
    GridFunction,
    integrate_second_order,
)

__all__ = [
    "OscillatorParams",
    "DampingRegime",
    "OscillatorTrajectory",
    "classify_damping",
    "solve_causal",
    "solve_retrocausal",
    "time_reverse",
    "AMPLITUDE_GUARD_FACTOR",
]

#: Blow-up guard: integration aborts once |q| exceeds this multiple of the
#: starting amplitude. The anti-damped equation integrated the wrong way is
#: exponentially unstable and must fail loudly, not silently.
AMPLITUDE_GUARD_FACTOR = 1e6


@dataclass(frozen=True)
class OscillatorParams:
    """Mass, damping, stiffness plus the boundary state (q0, v0).

    The state is read at the grid start for the causal problem and at the
    grid end for the retrocausal one. k is interchangeable with m*omega^2.
    """

    m: float
    C: float
    k: float
    q0: float
    v0: float

    def __post_init__(self):
        if not (np.isfinite(self.m) and self.m > 0):
            raise ValueError(f"mass must be positive, got {self.m}")
        if not (np.isfinite(self.C) and self.C >= 0):
            raise ValueError(f"damping must be >= 0, got {self.C}")
        if not (np.isfinite(self.k) and self.k >= 0):
            raise ValueError(f"stiffness must be >= 0, got {self.k}")
        if not (np.isfinite(self.q0) and np.isfinite(self.v0)):
            raise ValueError("boundary state must be finite")


class DampingRegime(enum.Enum):
    UNDAMPED = "undamped"
    UNDERDAMPED = "underdamped"
    CRITICAL = "critical"
    OVERDAMPED = "overdamped"


def classify_damping(params: OscillatorParams) -> DampingRegime:
    """Sign classification of the discriminant C^2 - 4 m k, with a relative
    tolerance band around zero treated as critical."""
    if params.C == 0:
        return DampingRegime.UNDAMPED
    disc = params.C**2 - 4.0 * params.m * params.k
    band = DEFAULT_TOLERANCES.critical_band * max(params.C**2, 4.0 * params.m * params.k)
    if abs(disc) <= band:
        return DampingRegime.CRITICAL
    return DampingRegime.UNDERDAMPED if disc < 0 else DampingRegime.OVERDAMPED


@dataclass(frozen=True, eq=False)
class OscillatorTrajectory:
    """Integrated trajectory: position and velocity samples on the grid."""

    params: OscillatorParams
    grid: Grid
    position: GridFunction
    velocity: GridFunction

    def energy(self) -> np.ndarray:
        """Mechanical energy 0.5 m v^2 + 0.5 k q^2 at every sample."""
        q = self.position.samples
        v = self.velocity.samples
        return 0.5 * self.params.m * v**2 + 0.5 * self.params.k * q**2


def _guard_limit(params: OscillatorParams) -> float:
    scale = max(abs(params.q0), abs(params.v0), 1e-12)
    return AMPLITUDE_GUARD_FACTOR * scale


def solve_causal(params: OscillatorParams, grid: Grid) -> OscillatorTrajectory:
    """RK4 trajectory of m q'' + C q' + k q = 0 from (q0, v0) at grid.a.

    For C > 0 the energy decays, so the envelope of |q| shrinks toward
    equilibrium after transients."""
    m, big_c, k = params.m, params.C, params.k

    def accel(q, v):
        return -(big_c * v + k * q) / m

    q, v = integrate_second_order(accel, params.q0, params.v0, grid,
                                  amplitude_limit=_guard_limit(params))
    return OscillatorTrajectory(params, grid, GridFunction(grid, q),
                                GridFunction(grid, v))


def solve_retrocausal(params: OscillatorParams, grid: Grid) -> OscillatorTrajectory:
    """RK4 trajectory of m q'' - C q' + k q = 0 with (q0, v0) read at
    grid.b, integrated backward in t (the stable direction for the
    anti-damped equation)."""
    m, big_c, k = params.m, params.C, params.k

    def accel(q, v):
        return (big_c * v - k * q) / m

    q, v = integrate_second_order(accel, params.q0, params.v0, grid,
                                  backward=True,
                                  amplitude_limit=_guard_limit(params))
    return OscillatorTrajectory(params, grid, GridFunction(grid, q),
                                GridFunction(grid, v))


def time_reverse(f: GridFunction) -> GridFunction:
    """Reverse the samples: the value at t moves to a + b - t. Involution."""
    return GridFunction(f.grid, f.samples[::-1])
