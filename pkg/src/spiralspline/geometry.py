"""Problem data, chord preprocessing and evaluation of angle splines.

A unit-speed planar curve is described by its turning angle ``theta``; the
curve itself is ``Y0 + integral of (cos theta, sin theta)``.  Angle splines
here are piecewise cubic in the local parameter ``s = t - T[j]`` of each
segment, optionally with an extra ``F(p_j, s) * s**4`` term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import (
    ChordTooLong,
    CountMismatch,
    CurvatureTooSmall,
    GapRatio,
    NonMonotoneTimes,
    OutOfDomain,
    ProblemError,
    ZeroChord,
)
from .quadrature import QuadratureConfig, simpson_rule

TWO_PI = 2.0 * math.pi


def _frozen(x, shape=None) -> np.ndarray:
    arr = np.array(x, dtype=float)
    if shape is not None:
        arr = arr.reshape(shape)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class InterpolationProblem:
    """Waypoints ``Y[0..n]`` to be visited at times ``T[0..n]``."""

    times: np.ndarray
    waypoints: np.ndarray

    def __post_init__(self):
        try:
            times = np.array(self.times, dtype=float).reshape(-1)
            pts = np.array(self.waypoints, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ProblemError(f"non-numeric problem data: {exc}") from None
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise CountMismatch("waypoints must be a sequence of planar points")
        if len(times) != len(pts):
            raise CountMismatch(f"{len(times)} times but {len(pts)} waypoints")
        if len(times) < 3:
            raise CountMismatch("at least three waypoints (n >= 2 segments) are required")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(pts))):
            raise ProblemError("times and waypoints must be finite")
        bad = np.flatnonzero(np.diff(times) <= 0)
        if bad.size:
            j = int(bad[0])
            raise NonMonotoneTimes(f"times not strictly increasing at index {j + 1}: {times[j]} -> {times[j + 1]}")
        object.__setattr__(self, "times", _frozen(times))
        object.__setattr__(self, "waypoints", _frozen(pts))

    @property
    def n(self) -> int:
        return len(self.times) - 1

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def gaps(self) -> np.ndarray:
        """Chord vectors ``Y[j] - Y[j-1]``, shape (n, 2)."""
        return np.diff(self.waypoints, axis=0)


@dataclass(frozen=True)
class ValidationConfig:
    curvature_floor: float = 1e-3
    chord_radius_ceiling: float = 1.0 - 1e-12
    min_gap_ratio: float = 0.1
    max_gap_ratio: float = 10.0

    def __post_init__(self):
        if not self.curvature_floor > 0:
            raise ValueError("curvature_floor must be positive")
        if not 0 < self.chord_radius_ceiling < 1:
            raise ValueError("chord_radius_ceiling must lie in (0, 1)")
        if not 0 < self.min_gap_ratio <= self.max_gap_ratio:
            raise ValueError("gap ratio band must satisfy 0 < min <= max")


@dataclass(frozen=True, eq=False)
class ChordData:
    """Per-segment quantities derived from a validated problem.

    All arrays have one entry per segment (``n``); ``chords`` is (n, 2).
    """

    knots: np.ndarray
    origin: np.ndarray
    lengths: np.ndarray
    chords: np.ndarray
    radii: np.ndarray
    angles: np.ndarray
    curvatures: np.ndarray

    @property
    def n(self) -> int:
        return len(self.lengths)


def unwrap_angles(chords) -> np.ndarray:
    """Polar angles of the chords, each lifted to lie nearest its predecessor.

    The first angle is the principal value in (-pi, pi].  An exact tie of pi
    resolves upward.
    """
    q = np.asarray(chords, dtype=float).reshape(-1, 2)
    out = np.empty(len(q))
    for j, (x, y) in enumerate(q):
        if x == 0.0 and y == 0.0:
            raise ZeroChord(f"chord {j} is zero", segment=j)
        w = math.atan2(y, x)
        if w == -math.pi:
            w = math.pi
        if j:
            prev = out[j - 1]
            d = (w - prev + math.pi) % TWO_PI - math.pi
            if d == -math.pi:
                d = math.pi
            w = prev + d
        out[j] = w
    return out


def validate(problem: InterpolationProblem, cfg: ValidationConfig | None = None) -> ChordData:
    """Check admissibility and compute chord data.

    Raises ``ChordTooLong`` when a scaled chord ``r_j`` reaches the ceiling
    (no unit-speed curve of that duration is long enough, or the data is too
    straight there), ``CurvatureTooSmall`` when the discrete curvature drops
    below the floor and ``GapRatio`` when a segment duration is far from the
    mean duration.
    """
    cfg = cfg or ValidationConfig()
    L = problem.lengths
    mean = L.mean()
    for j, ratio in enumerate(L / mean):
        if not cfg.min_gap_ratio <= ratio <= cfg.max_gap_ratio:
            raise GapRatio(
                f"segment {j} duration {L[j]:.6g} is {ratio:.4g} x the mean, outside "
                f"[{cfg.min_gap_ratio}, {cfg.max_gap_ratio}]",
                segment=j,
            )
    q = problem.gaps / L[:, None]
    r = np.hypot(q[:, 0], q[:, 1])
    for j, rj in enumerate(r):
        if rj == 0.0:
            raise ZeroChord(f"waypoints {j} and {j + 1} coincide", segment=j)
        if rj >= cfg.chord_radius_ceiling:
            raise ChordTooLong(
                f"segment {j}: |Y[{j + 1}] - Y[{j}]| / L = {rj:.12g} is not below "
                f"{cfg.chord_radius_ceiling!r}; sampling too sparse or too straight",
                segment=j,
            )
    k = np.sqrt(12.0 * (1.0 - r * r)) / (L * r)
    for j, kj in enumerate(k):
        if kj < cfg.curvature_floor:
            raise CurvatureTooSmall(
                f"segment {j}: discrete curvature {kj:.6g} below floor {cfg.curvature_floor}",
                segment=j,
            )
    return ChordData(
        knots=problem.times,
        origin=_frozen(problem.waypoints[0]),
        lengths=_frozen(L),
        chords=_frozen(q),
        radii=_frozen(r),
        angles=_frozen(unwrap_angles(q)),
        curvatures=_frozen(k),
    )


@dataclass(frozen=True, eq=False)
class Extension:
    """Extra ``F(p_j, s) * s**4`` terms; ``p`` has shape (n, q).

    ``family`` needs ``F(p, t)`` and ``F_t(p, t)`` taking ``p`` of shape
    (..., q) and ``t`` of shape (..., k) and returning shape (..., k).
    """

    family: Any
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", _frozen(np.atleast_2d(np.asarray(self.p, dtype=float))))


@dataclass(frozen=True, eq=False)
class AngleSpline:
    """Piecewise turning angle ``theta_j(s) = a + b s + c s^2 + d s^3 (+ F s^4)``."""

    knots: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    origin: np.ndarray = field(default_factory=lambda: np.zeros(2))
    extension: Extension | None = None

    def __post_init__(self):
        knots = _frozen(self.knots)
        n = len(knots) - 1
        object.__setattr__(self, "knots", knots)
        for name in "abcd":
            arr = _frozen(getattr(self, name))
            if arr.shape != (n,):
                raise ValueError(f"coefficient {name} must have {n} entries")
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "origin", _frozen(self.origin, (2,)))
        if self.extension is not None and self.extension.p.shape[0] != n:
            raise ValueError("extension parameters must have one row per segment")

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.knots)

    @property
    def coefficients(self) -> np.ndarray:
        """Array of shape (n, 4) with rows (a_j, b_j, c_j, d_j)."""
        return np.column_stack([self.a, self.b, self.c, self.d])

    def segment_index(self, t, side: str = "right") -> np.ndarray:
        """Segment owning each ``t``.

        ``side="right"`` gives half-open segments ``[T[j], T[j+1])`` with the
        last one closed; ``side="left"`` gives ``(T[j], T[j+1]]`` so a knot
        belongs to the segment ending there.
        """
        t = np.asarray(t, dtype=float)
        lo, hi = self.knots[0], self.knots[-1]
        if np.any(~((t >= lo) & (t <= hi))):
            raise OutOfDomain(f"t outside [{lo}, {hi}]")
        j = np.searchsorted(self.knots, t, side="right" if side == "right" else "left") - 1
        return np.clip(j, 0, self.n - 1)

    def local_theta(self, j, s) -> np.ndarray:
        """theta_j(s) for segment indices ``j`` and local parameters ``s``.

        ``j`` has shape (k,); ``s`` has shape (k,) or (k, K).
        """
        j = np.asarray(j)
        s = np.asarray(s, dtype=float)
        idx = (j,) if s.ndim == j.ndim else (j, None)
        val = self.a[idx] + s * (self.b[idx] + s * (self.c[idx] + s * self.d[idx]))
        if self.extension is not None:
            p = self.extension.p[j]
            ss = s if s.ndim > j.ndim else s[..., None]
            F = self.extension.family.F(p, ss)
            val = val + (F * ss**4).reshape(val.shape)
        return val

    def local_dtheta(self, j, s) -> np.ndarray:
        j = np.asarray(j)
        s = np.asarray(s, dtype=float)
        idx = (j,) if s.ndim == j.ndim else (j, None)
        val = self.b[idx] + s * (2.0 * self.c[idx] + 3.0 * s * self.d[idx])
        if self.extension is not None:
            p = self.extension.p[j]
            ss = s if s.ndim > j.ndim else s[..., None]
            fam = self.extension.family
            val = val + (fam.F_t(p, ss) * ss**4 + 4.0 * fam.F(p, ss) * ss**3).reshape(val.shape)
        return val

    def continuity_residuals(self) -> dict[str, float]:
        """Largest violations of value/slope continuity and the end conditions."""
        L = self.lengths
        j = np.arange(self.n)
        end_val = self.local_theta(j, L)
        end_slope = self.local_dtheta(j, L)
        start_slope = self.local_dtheta(j, np.zeros(self.n))
        c0 = np.abs(end_val[:-1] - self.a[1:])
        c1 = np.abs(end_slope[:-1] - start_slope[1:])
        return {
            "c0": float(c0.max(initial=0.0)),
            "c1": float(c1.max(initial=0.0)),
            "start": float(abs(start_slope[0])),
            "end": float(abs(end_slope[-1])),
        }


def eval_theta(spline: AngleSpline, t):
    """Turning angle at time(s) ``t``."""
    tt = np.asarray(t, dtype=float)
    j = spline.segment_index(np.atleast_1d(tt))
    val = spline.local_theta(j, np.atleast_1d(tt) - spline.knots[j])
    return float(val[0]) if tt.ndim == 0 else val.reshape(tt.shape)


def eval_dtheta(spline: AngleSpline, t):
    """Curvature ``theta'(t)`` of the curve."""
    tt = np.asarray(t, dtype=float)
    j = spline.segment_index(np.atleast_1d(tt))
    val = spline.local_dtheta(j, np.atleast_1d(tt) - spline.knots[j])
    return float(val[0]) if tt.ndim == 0 else val.reshape(tt.shape)


def _partial_integrals(spline: AngleSpline, j: np.ndarray, s: np.ndarray, m: int) -> np.ndarray:
    nodes, w = simpson_rule(m)
    S = s[:, None] * nodes
    th = spline.local_theta(j, S)
    return np.column_stack([np.cos(th) @ w, np.sin(th) @ w]) * s[:, None]


def displacements(spline: AngleSpline, m: int) -> np.ndarray:
    """Composite-Simpson displacement of every segment, shape (n, 2)."""
    j = np.arange(spline.n)
    return _partial_integrals(spline, j, spline.lengths, m)


def eval_curve(spline: AngleSpline, t, quad: QuadratureConfig | None = None):
    """Point of ``y_theta`` at time(s) ``t``: origin plus the running integral."""
    quad = quad or QuadratureConfig()
    tt = np.asarray(t, dtype=float)
    flat = np.atleast_1d(tt).reshape(-1)
    j = spline.segment_index(flat)
    m = quad.simpson_subintervals
    anchors = spline.origin + np.vstack([np.zeros(2), np.cumsum(displacements(spline, m), axis=0)])
    pts = anchors[j] + _partial_integrals(spline, j, flat - spline.knots[j], m)
    return pts[0] if tt.ndim == 0 else pts.reshape(tt.shape + (2,))


def eval_tilde_curve(
    spline: AngleSpline,
    problem: InterpolationProblem,
    t,
    quad: QuadratureConfig | None = None,
    side: str = "right",
):
    """Segment-wise curve re-anchored at ``Y[j]`` at the start of each segment.

    It passes through every waypoint but may jump at interior knots.  With
    ``side="left"`` a knot is evaluated as the left limit of the segment
    ending there, which exposes the jump.  ``T[n]`` with ``side="right"``
    returns ``Y[n]``.
    """
    quad = quad or QuadratureConfig()
    tt = np.asarray(t, dtype=float)
    flat = np.atleast_1d(tt).reshape(-1)
    j = spline.segment_index(flat, side=side)
    s = flat - spline.knots[j]
    pts = problem.waypoints[j] + _partial_integrals(spline, j, s, quad.simpson_subintervals)
    if side == "right":
        at_end = flat == spline.knots[-1]
        pts[at_end] = problem.waypoints[-1]
    return pts[0] if tt.ndim == 0 else pts.reshape(tt.shape + (2,))


def _cubic_energy(L, b, c, d) -> np.ndarray:
    # integral over [0, L] of (b + 2 c s + 3 d s^2)^2
    return (
        b * b * L
        + 2.0 * b * c * L**2
        + (4.0 * c * c + 6.0 * b * d) * L**3 / 3.0
        + 3.0 * c * d * L**4
        + 9.0 * d * d * L**5 / 5.0
    )


def segment_energies(spline: AngleSpline, quad: QuadratureConfig | None = None) -> np.ndarray:
    if spline.extension is None:
        return _cubic_energy(spline.lengths, spline.b, spline.c, spline.d)
    quad = quad or QuadratureConfig(64, 64)
    nodes, w = simpson_rule(quad.simpson_subintervals)
    L = spline.lengths
    dth = spline.local_dtheta(np.arange(spline.n), L[:, None] * nodes)
    return (dth**2 @ w) * L


def elastic_energy(spline: AngleSpline, quad: QuadratureConfig | None = None) -> float:
    """Integral of squared curvature ``theta'(t)**2`` over the whole spline.

    Exact for cubic splines; composite Simpson on ``theta'**2`` when an
    extension is present.
    """
    return float(segment_energies(spline, quad).sum())


def knot_positions(spline: AngleSpline, m: int) -> np.ndarray:
    """``y_theta(T[j])`` for j = 0..n using m Simpson subintervals per segment."""
    return spline.origin + np.vstack([np.zeros(2), np.cumsum(displacements(spline, m), axis=0)])


def interpolation_residual(
    spline: AngleSpline,
    problem: InterpolationProblem,
    quad: QuadratureConfig | None = None,
) -> float:
    """Max knot gap ``|y_theta(T[j]) - Y[j]|``.

    Measured with four times the Simpson resolution of ``quad``.
    """
    quad = quad or QuadratureConfig()
    pos = knot_positions(spline, 4 * quad.simpson_subintervals)
    return float(np.hypot(*(pos - problem.waypoints).T).max())



def sample_segments(
    spline: AngleSpline,
    problem: InterpolationProblem,
    count: int,
    quad: QuadratureConfig | None = None,
) -> dict[str, np.ndarray]:
    """``count`` samples per segment of both ``y_theta`` and its re-anchored twin.

    Samples include both segment ends, so a knot appears twice: once as the
    end of segment j (left limit) and once as the start of segment j + 1.
    Returns arrays ``segment``, ``t``, ``y`` and ``tilde``.
    """
    if count < 2:
        raise ValueError("need at least two samples per segment")
    quad = quad or QuadratureConfig()
    m = quad.simpson_subintervals
    n = spline.n
    frac = np.linspace(0.0, 1.0, count)
    j = np.repeat(np.arange(n), count)
    s = (spline.lengths[:, None] * frac).reshape(-1)
    part = _partial_integrals(spline, j, s, m)
    return {
        "segment": j,
        "t": spline.knots[j] + s,
        "y": knot_positions(spline, m)[j] + part,
        "tilde": problem.waypoints[j] + part,
    }
