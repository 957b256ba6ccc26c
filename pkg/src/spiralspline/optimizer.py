"""Energy minimisation over an enlarged angle family.

Each segment gains a term ``F(p_j, s) * s**4``.  The cubic coefficients are
corrected so that the extra term vanishes in value and slope at both ends of
the segment, which keeps (u, v) meaningful: any (u, v, p) is still a C1
natural spline.  We minimise the elastic energy in the reduced space of p,
re-solving the knot-gap equations for (u, v) at every trial p.  Every
accepted iterate therefore interpolates, and the seed (p = 0) is itself a
feasible start.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .errors import ConstraintViolated, NoConvergence, SingularJacobian
from .geometry import AngleSpline, Extension, InterpolationProblem, elastic_energy, interpolation_residual
from .quadrature import QuadratureConfig, simpson_rule
from .refiner import (
    SolverConfig,
    UVParams,
    batch_displacements,
    coefficient_arrays,
    fd_jacobian,
    newton_solve,
    uv_from_coeffs,
)
from .results import BranchResult

ENERGY_SUBINTERVALS = 128


@dataclass(frozen=True, eq=False)
class ExtensionFamily:
    """A C1 family ``F(p, t)`` with q parameters per segment.

    ``F`` and ``F_t`` take ``p`` of shape (..., q) and ``t`` broadcastable
    against (..., k), returning the broadcast shape (..., k).
    """

    tag: str
    q: int
    F: Callable[[np.ndarray, np.ndarray], np.ndarray]
    F_t: Callable[[np.ndarray, np.ndarray], np.ndarray]

    @classmethod
    def constant(cls) -> "ExtensionFamily":
        return cls("constant", 1, _const_F, _const_Ft)

    @classmethod
    def polynomial(cls, q: int) -> "ExtensionFamily":
        """``F(p, t) = p_0 + p_1 t + ... + p_{q-1} t**(q-1)``."""
        if q < 1:
            raise ValueError("q must be at least 1")

        def F(p, t):
            p = np.asarray(p, dtype=float)
            t = np.asarray(t, dtype=float)
            out = p[..., q - 1 : q] + 0.0 * t
            for i in range(q - 2, -1, -1):
                out = out * t + p[..., i : i + 1]
            return out

        def F_t(p, t):
            p = np.asarray(p, dtype=float)
            t = np.asarray(t, dtype=float)
            out = 0.0 * (p[..., :1] + t)
            for i in range(q - 1, 0, -1):
                out = out * t + i * p[..., i : i + 1]
            return out

        return cls(f"polynomial{q}", q, F, F_t)


def _const_F(p, t):
    return np.asarray(p, dtype=float)[..., :1] + 0.0 * np.asarray(t, dtype=float)


def _const_Ft(p, t):
    return 0.0 * (np.asarray(p, dtype=float)[..., :1] + np.asarray(t, dtype=float))


FAMILIES = {"constant": ExtensionFamily.constant}


@dataclass(frozen=True, eq=False)
class ExtendedUVP:
    u: np.ndarray
    v: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).reshape(-1)
        v = np.asarray(self.v, dtype=float).reshape(-1)
        p = np.asarray(self.p, dtype=float).reshape(len(u), -1)
        if u.shape != v.shape:
            raise ValueError("u and v must have the same length")
        if not all(np.all(np.isfinite(x)) for x in (u, v, p)):
            raise ValueError("u, v and p must be finite")
        for name, x in zip("uvp", (u, v, p)):
            object.__setattr__(self, name, x)


def _extended_arrays(u, v, p, L, family: ExtensionFamily):
    # p has shape (..., n, q); F at the segment ends has shape (..., n)
    Lc = L[:, None]
    F = family.F(p, Lc)[..., 0]
    Ft = family.F_t(p, Lc)[..., 0]
    return coefficient_arrays(u, v, L, F, Ft)


def coeffs_from_uvp(
    uvp: ExtendedUVP,
    lengths,
    family: ExtensionFamily,
    t0: float = 0.0,
    origin=(0.0, 0.0),
) -> AngleSpline:
    """Extended spline for (u, v, p); C1 with zero end slopes for any input."""
    L = np.asarray(lengths, dtype=float)
    a, b, c, d = _extended_arrays(uvp.u, uvp.v, uvp.p, L, family)
    knots = t0 + np.concatenate([[0.0], np.cumsum(L)])
    return AngleSpline(knots, a, b, c, d, origin=origin, extension=Extension(family, uvp.p))


class _Problem:
    """Gap equations and energy on the packed vector ``(u, v, p.ravel())``."""

    def __init__(self, problem: InterpolationProblem, family: ExtensionFamily):
        self.L = problem.lengths
        self.gaps = problem.gaps
        self.n = problem.n
        self.family = family
        nodes, w = simpson_rule(ENERGY_SUBINTERVALS)
        self.s_energy = self.L[:, None] * nodes
        self.w_energy = w

    def split(self, X):
        n = self.n
        return X[..., :n], X[..., n : 2 * n], X[..., 2 * n :].reshape(X.shape[:-1] + (n, -1))

    def gaps_residual(self, X, m: int) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        u, v, p = self.split(X)
        a, b, c, d = _extended_arrays(u, v, p, self.L, self.family)
        z = batch_displacements(a, b, c, d, self.L, m, quartic=lambda s: self.family.F(p, s))
        return (z - self.gaps).reshape(X.shape[:-1] + (2 * self.n,))

    def energy(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        u, v, p = self.split(X)
        a, b, c, d = _extended_arrays(u, v, p, self.L, self.family)
        s = self.s_energy
        fam = self.family
        dth = b[..., None] + s * (2.0 * c[..., None] + 3.0 * s * d[..., None])
        dth = dth + fam.F_t(p, s) * s**4 + 4.0 * fam.F(p, s) * s**3
        return ((dth**2) @ self.w_energy * self.L).sum(axis=-1)


def optimize_energy(
    seed: BranchResult | AngleSpline,
    problem: InterpolationProblem,
    family: ExtensionFamily | None = None,
    quad: QuadratureConfig | None = None,
    solver: SolverConfig | None = None,
) -> tuple[AngleSpline, float]:
    """Locally minimise the elastic energy over (u, v, p) keeping interpolation.

    Starts from the refined seed with p = 0.  The result never has higher
    energy than the seed: if no feasible improvement is found the seed comes
    back unchanged.  Raises ``NoConvergence`` when the seed itself cannot be
    re-solved and ``ConstraintViolated`` when the final iterate misses the
    residual tolerance.
    """
    family = family or ExtensionFamily.constant()
    quad = quad or QuadratureConfig()
    solver = solver or SolverConfig()
    if isinstance(seed, BranchResult):
        if seed.refined is None:
            raise ValueError("optimisation needs a refined seed")
        spline = seed.refined
        m = max(seed.subintervals, quad.simpson_subintervals)
    else:
        spline = seed
        m = quad.simpson_subintervals
    n = problem.n
    q = family.q
    T0 = float(problem.times[0])
    origin = problem.waypoints[0]
    P = _Problem(problem, family)
    inner_tol = solver.residual_tol / (4.0 * n)
    h = solver.fd_step

    w0 = uv_from_coeffs(spline).vector
    seed_energy = elastic_energy(spline)

    def build(X) -> AngleSpline:
        u, v, p = P.split(X)
        return coeffs_from_uvp(ExtendedUVP(u, v, p), P.L, family, T0, origin)

    def feasible_w(w, p):
        fun = lambda W: P.gaps_residual(np.concatenate([W, np.broadcast_to(p, W.shape[:-1] + p.shape)], axis=-1), m)
        w, res, _ = newton_solve(fun, w, solver, inner_tol, solver.max_iterations)
        return w, res

    state = {"w": w0.copy()}
    best = {"E": np.inf, "X": None}

    def objective(p):
        try:
            w, res = feasible_w(state["w"], p)
        except SingularJacobian:
            return np.inf, np.zeros_like(p)
        if not res <= 10.0 * inner_tol:
            return np.inf, np.zeros_like(p)
        state["w"] = w
        X = np.concatenate([w, p])
        E = float(P.energy(X))
        if E < best["E"]:
            best["E"], best["X"] = E, X
        # implicit gradient: dE/dp = E_p - g_p^T lam with g_w^T lam = E_w
        G = fd_jacobian(lambda Y: P.gaps_residual(Y, m), X, h)
        gE = fd_jacobian(lambda Y: P.energy(Y)[..., None], X, h)[0]
        k = 2 * n
        lam = np.linalg.solve(G[:, :k].T, gE[:k])
        return E, gE[k:] - G[:, k:].T @ lam

    p0 = np.zeros(n * q)
    E0, _ = objective(p0)
    if not np.isfinite(E0):
        raise NoConvergence("seed does not satisfy the gap equations", best=spline, iterations=0)
    minimize(objective, p0, jac=True, method="BFGS", options={"gtol": 1e-7, "maxiter": 200})

    X = best["X"]
    out = build(X)
    res = interpolation_residual(out, problem, QuadratureConfig(m, m))
    if res > solver.residual_tol:
        raise ConstraintViolated(f"optimised spline misses the waypoints by {res:.3g}", residual=res)
    E = elastic_energy(out, QuadratureConfig(ENERGY_SUBINTERVALS, ENERGY_SUBINTERVALS))
    if E >= seed_energy:
        return spline, seed_energy
    return out, E
