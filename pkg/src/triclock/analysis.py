"""Fixed points, invariant segments, heteroclinics and Lyapunov scans.

Everything here analyzes the three-clock map F = id + eps * omega on the
closed square S.  The drift field omega does not depend on eps, so root
finding is eps-free; eps only enters stability data through the Jacobian
I + eps * D-omega.

The square carries eleven fixed points (three interior, four corners,
four edge midpoints), ten straight invariant segments whose restriction
dynamics are monotone interval maps of the form t -> t + eps * q(t), and
a web of heteroclinic orbits between the fixed points.  Two quadratic
Lyapunov functions, one per open triangle beside the main diagonal,
certify the global pull toward the splay attractors; their decrement per
step is evaluated in expanded form to avoid cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .core import (
    TWO_PI,
    CouplingParams,
    in_square,
    jacobian,
    omega_field,
    omega_jacobian,
    three_clock_step,
)

__all__ = [
    "FixedPointRecord",
    "FixedPointSearch",
    "InvariantSegment",
    "InvarianceCheck",
    "HeteroclinicOrbit",
    "HeteroclinicCensus",
    "LyapunovReport",
    "known_fixed_points",
    "find_fixed_points",
    "classify",
    "invariant_segments",
    "restriction_fixed_points",
    "verify_invariance",
    "trace_heteroclinic",
    "heteroclinic_census",
    "lyapunov_value",
    "orbital_derivative",
    "orbital_derivative_scan",
    "region_fixed_points",
]

_PI = math.pi
_THIRD = 2.0 * math.pi / 3.0

# |eigenvalue| this close to 1 is flagged instead of classified.
HYPERBOLICITY_TOL = 1e-10

Region = Literal["upper", "lower"]

_CENTERS: dict[str, tuple[float, float]] = {
    "upper": (_THIRD, 2.0 * _THIRD),
    "lower": (2.0 * _THIRD, _THIRD),
}


# ---------------------------------------------------------------------------
# Fixed points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FixedPointRecord:
    """A fixed point with its local linearization and stability class."""

    location: np.ndarray
    jacobian: np.ndarray
    eigenvalues: tuple[float, float]
    eigenvectors: tuple[np.ndarray, np.ndarray]
    kind: str  # attractor | repeller | saddle | non-hyperbolic
    residual: float

    def to_dict(self) -> dict:
        return {
            "location": [float(v) for v in self.location],
            "jacobian": [[float(v) for v in row] for row in self.jacobian],
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "eigenvectors": [[float(v) for v in vec] for vec in self.eigenvectors],
            "kind": self.kind,
            "residual": float(self.residual),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FixedPointRecord":
        return cls(
            location=np.asarray(d["location"], dtype=float),
            jacobian=np.asarray(d["jacobian"], dtype=float),
            eigenvalues=(float(d["eigenvalues"][0]), float(d["eigenvalues"][1])),
            eigenvectors=(
                np.asarray(d["eigenvectors"][0], dtype=float),
                np.asarray(d["eigenvectors"][1], dtype=float),
            ),
            kind=str(d["kind"]),
            residual=float(d["residual"]),
        )

    def unstable_directions(self) -> list[np.ndarray]:
        return [
            vec
            for lam, vec in zip(self.eigenvalues, self.eigenvectors)
            if abs(lam) > 1.0 + HYPERBOLICITY_TOL
        ]


@dataclass(frozen=True)
class FixedPointSearch:
    """Deduplicated roots plus the seeds that never converged."""

    records: tuple[FixedPointRecord, ...]
    unconverged_seeds: np.ndarray


def known_fixed_points() -> np.ndarray:
    """The eleven zeros of the drift field in the closed square.

    Three interior (the symmetric point and the two splay points), the four
    corners, and the four edge midpoints; shape (11, 2).
    """
    return np.array(
        [
            (_PI, _PI),
            (_THIRD, 2.0 * _THIRD),
            (2.0 * _THIRD, _THIRD),
            (0.0, 0.0),
            (0.0, TWO_PI),
            (TWO_PI, 0.0),
            (TWO_PI, TWO_PI),
            (0.0, _PI),
            (TWO_PI, _PI),
            (_PI, 0.0),
            (_PI, TWO_PI),
        ]
    )


def _eig2(J: np.ndarray) -> tuple[tuple[float, float], tuple[np.ndarray, np.ndarray]]:
    """Closed-form eigenpairs of a real 2x2 matrix with real spectrum."""
    a, b = float(J[0, 0]), float(J[0, 1])
    c, d = float(J[1, 0]), float(J[1, 1])
    disc = (a - d) * (a - d) + 4.0 * b * c
    if disc < 0.0:
        if disc < -1e-12:
            raise ValueError("complex eigenvalue pair; expected a real spectrum")
        disc = 0.0
    s = math.sqrt(disc)
    lams = ((a + d + s) / 2.0, (a + d - s) / 2.0)

    def vec(lam: float) -> np.ndarray:
        if abs(b) > 1e-14:
            v = np.array([b, lam - a])
        elif abs(c) > 1e-14:
            v = np.array([lam - d, c])
        else:
            v = np.array([1.0, 0.0]) if abs(lam - a) <= abs(lam - d) else np.array([0.0, 1.0])
        return v / float(np.linalg.norm(v))

    if abs(b) <= 1e-14 and abs(c) <= 1e-14 and abs(a - d) <= 1e-14:
        vecs: tuple[np.ndarray, np.ndarray] = (np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    else:
        vecs = (vec(lams[0]), vec(lams[1]))
    # Unstable direction first: order by descending modulus.
    if abs(lams[1]) > abs(lams[0]):
        lams = (lams[1], lams[0])
        vecs = (vecs[1], vecs[0])
    return lams, vecs


def classify(location, params: CouplingParams) -> FixedPointRecord:
    """Fill Jacobian, eigenpairs and the stability class at a fixed point.

    Eigenvalue moduli within ``HYPERBOLICITY_TOL`` of 1 make the point
    "non-hyperbolic" rather than being forced into a class.
    """
    params.require_analysis_range()
    location = np.asarray(location, dtype=float)
    residual = float(np.max(np.abs(omega_field(location))))
    if residual > 1e-10:
        raise ValueError(f"{location} is not a fixed point (drift residual {residual:.3e})")
    J = jacobian(location, params)
    lams, vecs = _eig2(J)
    moduli = [abs(l) for l in lams]
    if any(abs(m - 1.0) < HYPERBOLICITY_TOL for m in moduli):
        kind = "non-hyperbolic"
    elif all(m < 1.0 for m in moduli):
        kind = "attractor"
    elif all(m > 1.0 for m in moduli):
        kind = "repeller"
    else:
        kind = "saddle"
    return FixedPointRecord(location, J, lams, vecs, kind, residual)


def _newton_on_drift(
    seeds: np.ndarray, tol: float, max_iter: int = 50, max_halvings: int = 30
) -> tuple[np.ndarray, np.ndarray]:
    """Damped Newton on the drift field, iterates clamped to the square.

    Clamping keeps corner identities intact (the drift is periodic, so an
    escaped iterate would converge to a translated copy of a root).
    Returns final iterates and a converged mask.
    """
    p = np.clip(np.asarray(seeds, dtype=float), 0.0, TWO_PI).copy()
    res = np.max(np.abs(omega_field(p)), axis=-1)
    for _ in range(max_iter):
        todo = res > tol
        if not todo.any():
            break
        q = p[todo]
        r = omega_field(q)
        J = omega_jacobian(q)
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        safe = np.where(np.abs(det) > 1e-14, det, np.inf)  # singular -> zero step
        dx = np.empty_like(q)
        dx[:, 0] = (-r[:, 0] * J[:, 1, 1] + r[:, 1] * J[:, 0, 1]) / safe
        dx[:, 1] = (-r[:, 1] * J[:, 0, 0] + r[:, 0] * J[:, 1, 0]) / safe
        base = res[todo]
        step = dx
        cand = np.clip(q + step, 0.0, TWO_PI)
        cres = np.max(np.abs(omega_field(cand)), axis=-1)
        for _ in range(max_halvings):
            worse = (cres >= base) & (cres > tol)
            if not worse.any():
                break
            step = np.where(worse[:, None], step * 0.5, step)
            cand = np.clip(q + step, 0.0, TWO_PI)
            cres = np.max(np.abs(omega_field(cand)), axis=-1)
        p[todo] = cand
        res[todo] = cres
    return p, res <= tol


def find_fixed_points(
    seed_grid: int = 50, tol: float = 1e-12, params: CouplingParams | None = None
) -> FixedPointSearch:
    """Newton search for all drift zeros from a uniform seed lattice over S.

    Roots are deduplicated within 1e-6 and classified; seeds that fail to
    converge are returned, never silently dropped.  For eps < 1/9 the root
    set is exactly the eleven points of :func:`known_fixed_points`.
    """
    if params is None:
        raise ValueError("params is required")
    params.require_analysis_range()
    if seed_grid < 2:
        raise ValueError("seed_grid must be at least 2")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    axis = np.linspace(0.0, TWO_PI, seed_grid)
    gx, gy = np.meshgrid(axis, axis)
    seeds = np.column_stack((gx.ravel(), gy.ravel()))
    roots, ok = _newton_on_drift(seeds, tol)

    unique: list[np.ndarray] = []
    for root in roots[ok]:
        for seen in unique:
            if np.max(np.abs(root - seen)) < 1e-6:
                break
        else:
            unique.append(root)
    # Roots within rounding of an edge are boundary roots; snap them onto it
    # when that does not cost residual accuracy.
    snapped: list[np.ndarray] = []
    for root in unique:
        cand = root.copy()
        cand[np.abs(cand) < 1e-9] = 0.0
        cand[np.abs(cand - TWO_PI) < 1e-9] = TWO_PI
        if float(np.max(np.abs(omega_field(cand)))) <= tol:
            snapped.append(cand)
        else:
            snapped.append(root)
    snapped.sort(key=lambda r: (round(float(r[0]), 9), round(float(r[1]), 9)))
    records = tuple(classify(r, params) for r in snapped)
    return FixedPointSearch(records=records, unconverged_seeds=seeds[~ok])


# ---------------------------------------------------------------------------
# Invariant segments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InvariantSegment:
    """A straight segment mapped into itself, with its restriction dynamics.

    Points are ``origin + t * direction`` for t in ``domain``; the map
    restricted to the segment reads ``t -> t + eps * drift(t)``.
    """

    name: str
    origin: tuple[float, float]
    direction: tuple[float, float]
    domain: tuple[float, float]
    drift: Callable[[np.ndarray], np.ndarray]
    drift_derivative: Callable[[np.ndarray], np.ndarray]

    def point(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        o = np.asarray(self.origin)
        d = np.asarray(self.direction)
        return o + np.multiply.outer(t, d)

    def restriction(self, t, params: CouplingParams) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return t + params.epsilon * self.drift(t)


@dataclass(frozen=True)
class InvarianceCheck:
    """Result of sampling a segment and measuring how far F drifts off it."""

    name: str
    passed: bool
    max_deviation: float
    worst_point: np.ndarray
    monotone: bool
    min_slope: float

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "max_deviation": float(self.max_deviation),
            "worst_point": [float(v) for v in self.worst_point],
            "monotone": self.monotone,
            "min_slope": float(self.min_slope),
        }


def _g_drift(t):
    return 3.0 * np.sin(t)


def _g_drift_deriv(t):
    return 3.0 * np.cos(t)


def _h1_drift(t):
    return np.sin(t) + np.sin(2.0 * t)


def _h1_drift_deriv(t):
    return np.cos(t) + 2.0 * np.cos(2.0 * t)


def _h2_drift(t):
    return 2.0 * np.sin(t) - 2.0 * np.sin(0.5 * t)


def _h2_drift_deriv(t):
    return 2.0 * np.cos(t) - np.cos(0.5 * t)


def _d2_drift(t):
    return 2.0 * np.sin(t) + 2.0 * np.sin(0.5 * t)


def _d2_drift_deriv(t):
    return 2.0 * np.cos(t) + np.cos(0.5 * t)


def invariant_segments() -> tuple[InvariantSegment, ...]:
    """The ten invariant straight segments of the map on S.

    Edges and the main diagonal share the restriction t + 3*eps*sin(t); the
    anti-diagonal and the two chords through each splay point carry
    t + eps*(sin t + sin 2t); the remaining half-slope segments carry
    t + 2*eps*(sin t -+ sin(t/2)), the lower one being the mirror image of
    the upper one.
    """
    return (
        InvariantSegment("s0", (0.0, 0.0), (0.0, 1.0), (0.0, TWO_PI), _g_drift, _g_drift_deriv),
        InvariantSegment("s1", (TWO_PI, 0.0), (0.0, 1.0), (0.0, TWO_PI), _g_drift, _g_drift_deriv),
        InvariantSegment("r0", (0.0, 0.0), (1.0, 0.0), (0.0, TWO_PI), _g_drift, _g_drift_deriv),
        InvariantSegment("r1", (0.0, TWO_PI), (1.0, 0.0), (0.0, TWO_PI), _g_drift, _g_drift_deriv),
        InvariantSegment("diag", (0.0, 0.0), (1.0, 1.0), (0.0, TWO_PI), _g_drift, _g_drift_deriv),
        InvariantSegment(
            "anti_diag", (0.0, TWO_PI), (1.0, -1.0), (0.0, TWO_PI), _h1_drift, _h1_drift_deriv
        ),
        InvariantSegment("d1", (0.0, _PI), (1.0, 0.5), (0.0, _THIRD), _h2_drift, _h2_drift_deriv),
        InvariantSegment("c1", (0.0, 0.0), (1.0, 2.0), (_THIRD, _PI), _h1_drift, _h1_drift_deriv),
        InvariantSegment(
            "c2", (0.0, -TWO_PI), (1.0, 2.0), (_PI, 2.0 * _THIRD), _h1_drift, _h1_drift_deriv
        ),
        InvariantSegment(
            "d2", (0.0, 0.0), (1.0, 0.5), (2.0 * _THIRD, TWO_PI), _d2_drift, _d2_drift_deriv
        ),
    )


def restriction_fixed_points(segment: InvariantSegment, scan: int = 4096) -> np.ndarray:
    """Roots of the segment drift on its domain (eps-independent), sorted.

    Grid scan plus bisection; grid nodes already within rounding of a root
    count directly, which catches the domain endpoints.
    """
    a, b = segment.domain
    t = np.linspace(a, b, scan + 1)
    q = np.asarray(segment.drift(t), dtype=float)
    roots: list[float] = [float(t[i]) for i in np.flatnonzero(np.abs(q) < 1e-13)]
    sign_change = np.flatnonzero(q[:-1] * q[1:] < 0.0)
    for i in sign_change:
        lo, hi = float(t[i]), float(t[i + 1])
        qlo = float(q[i])
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            qm = float(segment.drift(mid))
            if qm == 0.0:
                lo = hi = mid
                break
            if (qm < 0.0) == (qlo < 0.0):
                lo, qlo = mid, qm
            else:
                hi = mid
            if hi - lo < 1e-15:
                break
        roots.append(0.5 * (lo + hi))
    roots.sort()
    out: list[float] = []
    for r in roots:
        if not out or r - out[-1] > 1e-9:
            out.append(r)
    return np.asarray(out)


def verify_invariance(
    segment: InvariantSegment,
    params: CouplingParams,
    samples: int = 1000,
    deviation_tol: float = 1e-12,
) -> InvarianceCheck:
    """Sample the segment, apply the map, and measure the off-segment drift.

    Passes when the worst perpendicular deviation stays below
    ``deviation_tol`` and the restriction map is strictly increasing (its
    slope 1 + eps * q'(t) stays positive on a dense sample).
    """
    params.require_analysis_range()
    if samples < 2:
        raise ValueError("need at least 2 samples")
    a, b = segment.domain
    t = np.linspace(a, b, samples)
    pts = segment.point(t)
    img = three_clock_step(pts, params)
    dx, dy = segment.direction
    w = img - np.asarray(segment.origin, dtype=float)
    # Cross-product point-to-line distance: exact zero for images that land
    # exactly on the segment, unlike a projection-based residual.
    dev = np.abs(dy * w[:, 0] - dx * w[:, 1]) / math.hypot(dx, dy)
    worst = int(np.argmax(dev))
    slope = 1.0 + params.epsilon * np.asarray(segment.drift_derivative(t), dtype=float)
    restricted = segment.restriction(t, params)
    monotone = bool(np.all(np.diff(restricted) > 0.0) and np.all(slope > 0.0))
    max_dev = float(dev[worst])
    return InvarianceCheck(
        name=segment.name,
        passed=(max_dev < deviation_tol) and monotone,
        max_deviation=max_dev,
        worst_point=pts[worst],
        monotone=monotone,
        min_slope=float(np.min(slope)),
    )


# ---------------------------------------------------------------------------
# Heteroclinic orbits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HeteroclinicOrbit:
    """A forward orbit running from one fixed point to another."""

    source: FixedPointRecord
    target: FixedPointRecord
    kind: str  # sa | rs | ra (source/target class initials)
    samples: np.ndarray

    def to_dict(self) -> dict:
        return {
            "source": [float(v) for v in self.source.location],
            "target": [float(v) for v in self.target.location],
            "kind": self.kind,
            "samples": [[float(v) for v in p] for p in self.samples],
        }


@dataclass(frozen=True)
class HeteroclinicCensus:
    orbits: tuple[HeteroclinicOrbit, ...]
    counts: dict[str, int]


_KIND_LETTER = {"attractor": "a", "repeller": "r", "saddle": "s"}


def _orbit_kind(source: FixedPointRecord, target: FixedPointRecord) -> str:
    try:
        return _KIND_LETTER[source.kind] + _KIND_LETTER[target.kind]
    except KeyError:
        raise ValueError(
            f"cannot label an orbit between kinds {source.kind!r} and {target.kind!r}"
        ) from None


def default_max_iterations(params: CouplingParams) -> int:
    """Iteration budget ceil(60/eps): covers escape plus contraction with margin."""
    return math.ceil(60.0 / params.epsilon)


def trace_heteroclinic(
    source: FixedPointRecord,
    direction,
    params: CouplingParams,
    step: float = 1e-6,
    max_iter: int | None = None,
    capture_tol: float = 1e-6,
) -> HeteroclinicOrbit:
    """Iterate the map from just off a fixed point until it lands at another.

    Seeds at ``source + step * direction`` (unit-normalized) and follows the
    forward orbit; terminates once within ``capture_tol`` of a different
    fixed point.  Raises ValueError when the seed falls outside the square
    and RuntimeError when the budget runs out without capture.
    """
    params.require_analysis_range()
    if max_iter is None:
        max_iter = default_max_iterations(params)
    v = np.asarray(direction, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValueError("direction must be nonzero")
    p = np.asarray(source.location, dtype=float) + step * (v / norm)
    if not bool(in_square(p)):
        raise ValueError("seed point leaves the square; try the opposite sign")
    fps = known_fixed_points()
    samples = [p]
    for _ in range(max_iter):
        p = three_clock_step(p, params)
        if not bool(in_square(p)):  # impossible while S is invariant
            raise RuntimeError(f"orbit escaped the square at {p}")
        samples.append(p)
        dists = np.max(np.abs(fps - p), axis=-1)
        j = int(np.argmin(dists))
        if dists[j] <= capture_tol and np.max(np.abs(fps[j] - source.location)) > capture_tol:
            target = classify(fps[j], params)
            return HeteroclinicOrbit(
                source=source,
                target=target,
                kind=_orbit_kind(source, target),
                samples=np.asarray(samples),
            )
    raise RuntimeError(
        f"no fixed point captured within {max_iter} iterations from "
        f"{source.location}; last point {p}"
    )


def _segment_orbit(
    segment: InvariantSegment,
    t_src: float,
    t_dst: float,
    params: CouplingParams,
    step: float = 1e-6,
    capture_tol: float = 1e-6,
) -> HeteroclinicOrbit:
    """Heteroclinic running inside a segment, built from its restriction map."""
    source = classify(segment.point(t_src), params)
    target = classify(segment.point(t_dst), params)
    t = t_src + math.copysign(step, t_dst - t_src)
    ts = [t]
    for _ in range(default_max_iterations(params)):
        t = float(segment.restriction(t, params))
        ts.append(t)
        if abs(t - t_dst) <= capture_tol:
            break
    else:
        raise RuntimeError(f"restriction orbit on {segment.name} failed to land")
    return HeteroclinicOrbit(
        source=source,
        target=target,
        kind=_orbit_kind(source, target),
        samples=segment.point(np.asarray(ts)),
    )


def heteroclinic_census(params: CouplingParams, step: float = 1e-6) -> HeteroclinicCensus:
    """Full catalog of heteroclinic orbits between the eleven fixed points.

    Saddle-to-attractor orbits come from 2-D tracing along every unstable
    eigendirection (both signs, seeds outside S discarded).  The orbits
    between the remaining fixed points live inside the invariant segments
    and are enumerated from the segment restriction dynamics; the ones that
    duplicate a traced saddle-to-attractor connection are dropped.
    """
    params.require_analysis_range()
    records = [classify(p, params) for p in known_fixed_points()]
    orbits: list[HeteroclinicOrbit] = []
    for rec in records:
        if rec.kind != "saddle":
            continue
        for u in rec.unstable_directions():
            for sign in (1.0, -1.0):
                seed = rec.location + step * sign * u
                if not bool(in_square(seed)):
                    continue
                orbits.append(trace_heteroclinic(rec, sign * u, params, step=step))
    for segment in invariant_segments():
        fps_t = restriction_fixed_points(segment)
        for t0, t1 in zip(fps_t[:-1], fps_t[1:]):
            qm = float(segment.drift(0.5 * (t0 + t1)))
            if qm == 0.0:
                continue
            t_src, t_dst = (t0, t1) if qm > 0.0 else (t1, t0)
            orbit = _segment_orbit(segment, float(t_src), float(t_dst), params, step=step)
            if orbit.kind != "sa":  # sa orbits were already found by tracing
                orbits.append(orbit)
    counts: dict[str, int] = {}
    for orbit in orbits:
        counts[orbit.kind] = counts.get(orbit.kind, 0) + 1
    return HeteroclinicCensus(orbits=tuple(orbits), counts=counts)


# ---------------------------------------------------------------------------
# Lyapunov functions
# ---------------------------------------------------------------------------

def _require_region(region: str) -> tuple[float, float]:
    if region not in _CENTERS:
        raise ValueError(f"region must be 'upper' or 'lower', got {region!r}")
    return _CENTERS[region]


def _in_region(p: np.ndarray, region: str, slack: float = 1e-12) -> np.ndarray:
    x = p[..., 0]
    y = p[..., 1]
    side = y >= x - slack if region == "upper" else y <= x + slack
    return in_square(p, tol=slack) & side


def lyapunov_value(p, region: Region) -> np.ndarray:
    """Quadratic Lyapunov function of the given triangle, zero at its attractor.

    ``V(x, y) = u**2 + v**2 - u*v`` with (u, v) the offset from the
    triangle's splay point; positive definite since the cross term is
    dominated.  Points outside the closed triangle are rejected.
    """
    cx, cy = _require_region(region)
    p = np.asarray(p, dtype=float)
    if not np.all(_in_region(p, region)):
        raise ValueError(f"point outside the closed {region} triangle")
    u = p[..., 0] - cx
    v = p[..., 1] - cy
    return u * u + v * v - u * v


def orbital_derivative(p, region: Region, params: CouplingParams) -> np.ndarray:
    """Per-step Lyapunov decrement V(F(p)) - V(p), in expanded form.

    Expanding the quadratic keeps the result accurate near the attractor,
    where the naive difference of two O(1) values loses all digits::

        DV = eps**2 * (f**2 + g**2 - f*g) + eps * (u*(2f - g) + v*(2g - f))
    """
    cx, cy = _require_region(region)
    p = np.asarray(p, dtype=float)
    if not np.all(_in_region(p, region)):
        raise ValueError(f"point outside the closed {region} triangle")
    w = omega_field(p)
    f = w[..., 0]
    g = w[..., 1]
    u = p[..., 0] - cx
    v = p[..., 1] - cy
    eps = params.epsilon
    return eps * eps * (f * f + g * g - f * g) + eps * (u * (2.0 * f - g) + v * (2.0 * g - f))


def region_fixed_points(region: Region) -> np.ndarray:
    """Fixed points lying in the closed triangle (seven per region)."""
    _require_region(region)
    fps = known_fixed_points()
    return fps[_in_region(fps, region)]


@dataclass(frozen=True)
class LyapunovReport:
    """Scan of the Lyapunov decrement over a triangular lattice."""

    region: str
    grid_resolution: int
    max_df: float
    zero_set: np.ndarray
    passed: bool
    cell: float

    def to_dict(self) -> dict:
        return {
            "region": self.region,
            "grid_resolution": self.grid_resolution,
            "max_df": float(self.max_df),
            "zero_set": [[float(v) for v in p] for p in self.zero_set],
            "passed": self.passed,
            "cell": float(self.cell),
        }


def orbital_derivative_scan(
    region: Region,
    params: CouplingParams,
    grid: int = 300,
    zero_tol: float = 1e-12,
    max_df_tol: float = 1e-12,
) -> LyapunovReport:
    """Evaluate the decrement on a triangular lattice and report its sign.

    Passes when the lattice maximum stays below ``max_df_tol`` and every
    near-zero sample (|DV| < zero_tol) sits within two lattice cells of a
    fixed point of the region's closure.  The sign is reported, never
    assumed; a positive maximum is a reported failure.
    """
    params.require_analysis_range()
    if grid < 100:
        raise ValueError("grid must be at least 100 per side")
    axis = np.linspace(0.0, TWO_PI, grid + 1)
    gx, gy = np.meshgrid(axis, axis)
    pts = np.column_stack((gx.ravel(), gy.ravel()))
    pts = pts[_in_region(pts, region, slack=0.0)]
    df = orbital_derivative(pts, region, params)
    max_df = float(np.max(df))
    zero_pts = pts[np.abs(df) < zero_tol]
    cell = TWO_PI / grid
    fps = region_fixed_points(region)
    near_fixed = True
    if zero_pts.size:
        dists = np.min(
            np.max(np.abs(zero_pts[:, None, :] - fps[None, :, :]), axis=-1), axis=-1
        )
        near_fixed = bool(np.all(dists <= 2.0 * cell))
    return LyapunovReport(
        region=region,
        grid_resolution=grid,
        max_df=max_df,
        zero_set=zero_pts,
        passed=(max_df <= max_df_tol) and near_fixed,
        cell=cell,
    )
