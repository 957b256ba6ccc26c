"""Linear-algebra estimates of the angle-spline coefficients for one branch.

A branch is a sign vector ``sigma`` in {-1, +1}^n choosing the root of the
quadratic relation between the local curvature and the discrete curvature
``k_j`` on each segment.  For n = 2 the coefficients have a closed form; for
n >= 3 two tridiagonal solves give the slopes ``b`` and the remaining
coefficients follow segment by segment.  The estimates are accurate to
fourth order in the sample spacing and serve as starting points for the
refiner.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import NegativeDiscriminant
from .geometry import AngleSpline, ChordData
from .tridiagonal import TridiagonalSystem, solve_tridiagonal

DISCRIMINANT_FLOOR = 1e-14


def as_sigma(sigma: Sequence[int], n: int | None = None) -> np.ndarray:
    s = np.asarray(sigma, dtype=float).reshape(-1)
    if n is not None and len(s) != n:
        raise ValueError(f"sign vector has {len(s)} entries, expected {n}")
    if not np.all(np.abs(s) == 1.0):
        raise ValueError("sign vector entries must be exactly +1 or -1")
    return s


def sigma_from_index(p: int, n: int) -> tuple[int, ...]:
    """Branch ``p`` (1..2**n) to its sign vector.

    ``sigma_j = (-1)**p_j`` where p_1..p_n are the n low binary digits of p,
    most significant first.  So p = 2**n is the all-plus branch.
    """
    if not 1 <= p <= 2**n:
        raise ValueError(f"branch index must lie in 1..{2**n}")
    bits = format(p % 2**n, f"0{n}b")
    return tuple(-1 if bit == "1" else 1 for bit in bits)


def index_from_sigma(sigma: Sequence[int]) -> int:
    s = as_sigma(sigma)
    n = len(s)
    p = int("".join("1" if x < 0 else "0" for x in s), 2)
    return p or 2**n


def all_sigmas(n: int) -> Iterator[tuple[int, tuple[int, ...]]]:
    """(p, sigma) for p = 1..2**n in the documented order."""
    for p in range(1, 2**n + 1):
        yield p, sigma_from_index(p, n)


@dataclass(frozen=True, eq=False)
class RhoVector:
    values: np.ndarray
    discriminants: np.ndarray


def _check(disc: float, j: int) -> None:
    if not disc > DISCRIMINANT_FLOOR:
        raise NegativeDiscriminant(
            f"square-root argument {disc:.6g} on segment {j} is not positive; "
            "sampling too sparse for this branch",
            index=j,
            value=float(disc),
        )


def rho_endpoints(chord: ChordData, sigma) -> tuple[float, float]:
    """Signed curvature targets of the first and last segments."""
    s = as_sigma(sigma, chord.n)
    k, L = chord.curvatures, chord.lengths
    out = []
    for j in (0, chord.n - 1):
        disc = 1.0 - k[j] ** 2 * L[j] ** 2 / 20.0
        _check(disc, j)
        out.append(s[j] * k[j] * np.sqrt(disc))
    return out[0], out[1]


def rho_interior(chord: ChordData, sigma, b) -> RhoVector:
    """All n targets; interior ones carry the slope-jump correction."""
    s = as_sigma(sigma, chord.n)
    n = chord.n
    k, L = chord.curvatures, chord.lengths
    b = np.asarray(b, dtype=float)
    if len(b) != n:
        raise ValueError("b must have one entry per segment")
    values = np.empty(n)
    disc = 1.0 - k**2 * L**2 / 20.0
    values[0], values[-1] = rho_endpoints(chord, s)
    for j in range(1, n - 1):
        disc[j] = k[j] ** 2 * (1.0 - k[j] ** 2 * L[j] ** 2 / 20.0) - (b[j + 1] - b[j]) ** 2 / 60.0
        _check(disc[j], j)
        values[j] = s[j] * np.sqrt(disc[j])
    return RhoVector(values, disc)


def _spline(chord: ChordData, a, b, c, d) -> AngleSpline:
    return AngleSpline(chord.knots, a, b, c, d, origin=chord.origin)


def estimate_n2(chord: ChordData, sigma) -> AngleSpline:
    """Closed-form estimate for two segments."""
    if chord.n != 2:
        raise ValueError("estimate_n2 needs exactly two segments")
    r1, r2 = rho_endpoints(chord, sigma)
    L1, L2 = chord.lengths
    w1, w2 = chord.angles
    S = L1 + L2
    a = [
        (12 * (2 * L1 * w1 + 3 * L2 * w1 + L1 * w2) - 5 * L1 * (4 * r1 * L1 + 3 * r1 * L2 + r2 * L2)) / (36 * S),
        (12 * (L1 * w2 + L2 * w1) + 5 * L1 * L2 * (r1 - r2)) / (12 * S),
    ]
    b = [0.0, (24 * (w2 - w1) - 10 * (r2 * L2 + r1 * L1)) / (3 * S)]
    c = [
        (12 * (w1 - w2) + 5 * (2 * r1 * L1 + r1 * L2 + r2 * L2)) / (2 * L1 * S),
        (84 * (w1 - w2) + 5 * (7 * r1 * L1 + 3 * r2 * L1 + 10 * r2 * L2)) / (6 * L2 * S),
    ]
    d = [
        (60 * (w2 - w1) - 5 * (8 * r1 * L1 + 3 * r1 * L2 + 5 * r2 * L2)) / (9 * L1**2 * S),
        (60 * (w2 - w1) - 5 * (5 * r1 * L1 + 3 * r2 * L1 + 8 * r2 * L2)) / (9 * L2**2 * S),
    ]
    return _spline(chord, a, b, c, d)


def _slope_system(L: np.ndarray, diag_scale: float, off_sign: float, rhs: np.ndarray) -> TridiagonalSystem:
    n = len(L)
    diag = np.ones(n)
    diag[1:] = diag_scale * (L[:-1] + L[1:])
    sub = off_sign * L[:-1]
    sup = np.zeros(n - 1)
    sup[1:] = off_sign * L[1:-1]
    return TridiagonalSystem(sub, diag, sup, rhs)


def stage1_system(chord: ChordData) -> TridiagonalSystem:
    L, w = chord.lengths, chord.angles
    rhs = np.zeros(chord.n)
    rhs[1:] = 6.0 * np.diff(w)
    return _slope_system(L, 2.0, 1.0, rhs)


def stage2_system(chord: ChordData, rho: np.ndarray) -> TridiagonalSystem:
    L, w = chord.lengths, chord.angles
    rhs = np.zeros(chord.n)
    Lr = L * rho
    rhs[1:] = 24.0 * np.diff(w) - 10.0 * (Lr[:-1] + Lr[1:])
    return _slope_system(L, 3.0, -1.0, rhs)


def estimate_b_stage1(chord: ChordData) -> np.ndarray:
    """Second-order slope estimate from the curvature-free system."""
    return solve_tridiagonal(stage1_system(chord))


def estimate_b_stage2(chord: ChordData, sigma, b2) -> np.ndarray:
    """Third-order slope estimate, with the targets evaluated at ``b2``."""
    rho = rho_interior(chord, sigma, b2).values
    return solve_tridiagonal(stage2_system(chord, rho))


def recover_cda(chord: ChordData, sigma, b, rho=None) -> AngleSpline:
    """Fill in c, d and a from the slopes.

    ``rho`` defaults to the targets evaluated at ``b``; the full estimate
    passes the targets used for the stage-2 right-hand side instead.
    """
    n = chord.n
    b = np.asarray(b, dtype=float)
    rho = rho_interior(chord, sigma, b).values if rho is None else np.asarray(rho, dtype=float)
    L, w = chord.lengths, chord.angles
    cL = np.empty(n)
    dL2 = np.empty(n)
    cL[1:-1] = (-3.0 * b[2:] - 7.0 * b[1:-1]) / 4.0 + 2.5 * rho[1:-1]
    dL2[1:-1] = 5.0 * (b[2:] + b[1:-1]) / 6.0 - 5.0 * rho[1:-1] / 3.0
    cL[0] = (-3.0 * b[1] + 10.0 * rho[0]) / 4.0
    dL2[0] = 5.0 * (b[1] - 2.0 * rho[0]) / 6.0
    cL[-1] = -(7.0 * b[-1] - 10.0 * rho[-1]) / 4.0
    dL2[-1] = 5.0 * (b[-1] - 2.0 * rho[-1]) / 6.0
    c = cL / L
    d = dL2 / L**2
    a = w - b * L / 2.0 - c * L**2 / 3.0 - d * L**3 / 4.0
    return _spline(chord, a, b, c, d)


def estimate(chord: ChordData, sigma) -> AngleSpline:
    """Estimated angle spline for branch ``sigma``.

    Raises ``NegativeDiscriminant`` when the branch is infeasible at this
    sampling; other branches are unaffected.
    """
    s = as_sigma(sigma, chord.n)
    if chord.n == 2:
        return estimate_n2(chord, s)
    b2 = estimate_b_stage1(chord)
    rho = rho_interior(chord, s, b2).values
    b = solve_tridiagonal(stage2_system(chord, rho))
    return recover_cda(chord, s, b, rho=rho)
