"""Pointwise maps for impact-coupled identical clocks.

The module collects every map used elsewhere in the package, all pure
functions of their arguments:

* the per-kick phase perturbation ``P(phi) = eps * sin(phi)``,
* the one-clock escapement return map ``v -> sqrt((v - 4*mu)**2 + h**2)``,
* the two-clock Adler update ``phi -> phi + eps * sin(phi)``,
* the three-clock phase-difference map on the closed square
  ``S = [0, 2*pi]**2``::

      F(x, y) = (x, y) + eps * (f(x, y), g(x, y))
      f(x, y) = 2 sin x + sin y + sin(x - y)
      g(x, y) = sin x + 2 sin y + sin(y - x) = f(y, x)

  together with its exact Jacobian.

State points for the square are plain ``(..., 2)`` float arrays; every
function broadcasts, so the same code serves single-point analysis and
bulk grid scans.  The square is kept CLOSED: there is no modular
wrapping of map states, because the edges and the main diagonal are
invariant sets that the analysis layer has to see exactly.  A separate
:func:`normalize_phase` exists for absolute clock phases, which do wrap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TWO_PI",
    "EPSILON_BOUND",
    "MIN_ANALYSIS_EPSILON",
    "BOUNDARY_SNAP_TOL",
    "CouplingParams",
    "normalize_phase",
    "perturbation",
    "andronov_step",
    "andronov_fixed_point",
    "adler_step",
    "omega_field",
    "omega_jacobian",
    "three_clock_step",
    "jacobian",
    "in_square",
]

TWO_PI = 2.0 * math.pi

# Sufficient coupling bound: below 1/9 every restriction map used by the
# analysis layer is a homeomorphism of its segment.
EPSILON_BOUND = 1.0 / 9.0

# Below this the map is indistinguishable from the identity and fixed-point
# classification is meaningless; analysis operations refuse such couplings.
MIN_ANALYSIS_EPSILON = 1e-8

# Map iterates this close to an edge of S are snapped onto it, so that the
# boundary stays exactly invariant under accumulated rounding.
BOUNDARY_SNAP_TOL = 1e-14


@dataclass(frozen=True)
class CouplingParams:
    """Coupling strength plus the physical constants it summarizes.

    ``epsilon`` is the primary free parameter; ``mu`` (dry friction),
    ``h`` (energy-kick velocity scale) and ``alpha`` (interaction
    constant) only matter for the one-clock escapement map and for
    documentation.  The common angular frequency is fixed at 1.
    """

    epsilon: float
    mu: float = 0.1
    h: float = 1.0
    alpha: float = 0.0
    omega: float = 1.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.epsilon) or self.epsilon < 0.0:
            raise ValueError(f"epsilon must be finite and >= 0, got {self.epsilon}")
        if not math.isfinite(self.mu) or self.mu < 0.0:
            raise ValueError(f"mu must be finite and >= 0, got {self.mu}")
        if not math.isfinite(self.h) or self.h <= 0.0:
            raise ValueError(f"h must be finite and > 0, got {self.h}")
        if not math.isfinite(self.alpha) or self.alpha < 0.0:
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha}")
        if self.omega != 1.0:
            raise ValueError("the model fixes the common angular frequency at 1")

    def require_analysis_range(self) -> None:
        """Reject couplings outside (1e-8, 1/9), where analysis is unsound."""
        if not MIN_ANALYSIS_EPSILON < self.epsilon < EPSILON_BOUND:
            raise ValueError(
                f"epsilon={self.epsilon} outside the analysis range "
                f"({MIN_ANALYSIS_EPSILON}, 1/9 ~= {EPSILON_BOUND:.6f})"
            )


def normalize_phase(phi):
    """Reduce absolute phases to the canonical representative in [0, 2*pi).

    Tiny negative inputs would round to exactly 2*pi under the plain
    modulo; those are folded back to 0 so the half-open range holds.
    """
    out = np.asarray(phi, dtype=float) % TWO_PI
    return np.where(out == TWO_PI, 0.0, out)


def perturbation(phi, params: CouplingParams):
    """Per-kick phase correction P(phi) = eps * sin(phi); odd, 2*pi-periodic."""
    return params.epsilon * np.sin(np.asarray(phi, dtype=float))


def andronov_step(v: float, params: CouplingParams) -> float:
    """One escapement cycle of an isolated clock: sqrt((v - 4*mu)**2 + h**2).

    Raises ValueError when ``v <= 4*mu``: such an orbit leaves the basin of
    the limit cycle and the clock stops.
    """
    threshold = 4.0 * params.mu
    if v <= threshold:
        raise ValueError(
            f"velocity {v} is outside the limit-cycle basin (requires v > 4*mu = {threshold})"
        )
    return math.hypot(v - threshold, params.h)


def andronov_fixed_point(params: CouplingParams) -> float:
    """Stationary section velocity v_f = h**2 / (8*mu) + 2*mu (needs mu > 0)."""
    if params.mu <= 0.0:
        raise ValueError("the escapement fixed point requires mu > 0")
    return params.h**2 / (8.0 * params.mu) + 2.0 * params.mu


def adler_step(phi, params: CouplingParams):
    """Two-clock phase-difference update phi + eps*sin(phi), wrapped to [0, 2*pi)."""
    phi = np.asarray(phi, dtype=float)
    return normalize_phase(phi + params.epsilon * np.sin(phi))


def omega_field(p) -> np.ndarray:
    """Drift field (f, g) of the three-clock map, independent of eps.

    ``f(x, y) = 2 sin x + sin y + sin(x - y)`` and ``g(x, y) = f(y, x)``.
    Accepts any ``(..., 2)`` array and broadcasts.
    """
    p = np.asarray(p, dtype=float)
    x = p[..., 0]
    y = p[..., 1]
    sx = np.sin(x)
    sy = np.sin(y)
    sxy = np.sin(x - y)
    # g uses sin(y - x) == -sin(x - y) exactly (IEEE sine is odd).
    return np.stack((2.0 * sx + sy + sxy, sx + 2.0 * sy - sxy), axis=-1)


def omega_jacobian(p) -> np.ndarray:
    """Derivative of :func:`omega_field`, shape ``(..., 2, 2)``."""
    p = np.asarray(p, dtype=float)
    x = p[..., 0]
    y = p[..., 1]
    cx = np.cos(x)
    cy = np.cos(y)
    cxy = np.cos(x - y)
    row0 = np.stack((2.0 * cx + cxy, cy - cxy), axis=-1)
    row1 = np.stack((cx - cxy, cxy + 2.0 * cy), axis=-1)
    return np.stack((row0, row1), axis=-2)


def _snap_to_edges(q: np.ndarray) -> np.ndarray:
    q = np.where(np.abs(q) < BOUNDARY_SNAP_TOL, 0.0, q)
    return np.where(np.abs(q - TWO_PI) < BOUNDARY_SNAP_TOL, TWO_PI, q)


def three_clock_step(p, params: CouplingParams) -> np.ndarray:
    """One cycle of the phase-difference map, F(p) = p + eps * omega_field(p).

    For ``p`` in the closed square S and eps < 1/9 the image stays in S and
    edge points stay on their edge; coordinates within ``BOUNDARY_SNAP_TOL``
    of 0 or 2*pi are snapped onto the boundary to keep that exact under
    rounding.
    """
    p = np.asarray(p, dtype=float)
    return _snap_to_edges(p + params.epsilon * omega_field(p))


def jacobian(p, params: CouplingParams) -> np.ndarray:
    """Exact Jacobian of the three-clock map, I + eps * omega_jacobian(p)."""
    dw = omega_jacobian(p)
    return np.eye(2) + params.epsilon * dw


def in_square(p, tol: float = 0.0) -> np.ndarray:
    """Whether each point lies in the closed square S, with optional slack."""
    p = np.asarray(p, dtype=float)
    return np.all((p >= -tol) & (p <= TWO_PI + tol), axis=-1)
