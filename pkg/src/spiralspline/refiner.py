"""Closing the knot gaps of an estimated spline.

Natural C1 cubic angle splines are parameterised by 2n numbers (u, v):
``v[0]`` is the starting angle, ``v[j] = b_j L_j`` the scaled slopes,
``u[j] = a_{j+1}`` the knot angles and ``u[n-1] = d_n L_n**3``.  Every (u, v)
gives a spline satisfying the continuity and end conditions, so
interpolation becomes the square system ``z_j(u, v) = Y[j] - Y[j-1]`` with
``z_j`` the segment displacement.  We solve it by damped Newton with a
finite-difference Jacobian, doubling the Simpson resolution until the
measured residual is below tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContinuityViolated, ExtensionPresent, NoConvergence, SingularJacobian
from .geometry import AngleSpline, InterpolationProblem, interpolation_residual
from .quadrature import QuadratureConfig, simpson_rule


@dataclass(frozen=True, eq=False)
class UVParams:
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).reshape(-1)
        v = np.asarray(self.v, dtype=float).reshape(-1)
        if u.shape != v.shape:
            raise ValueError("u and v must have the same length")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise ValueError("u and v must be finite")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.u, self.v])

    @classmethod
    def from_vector(cls, x) -> "UVParams":
        x = np.asarray(x, dtype=float)
        n = len(x) // 2
        return cls(x[:n], x[n:])


@dataclass(frozen=True)
class SolverConfig:
    residual_tol: float = 1e-10
    max_iterations: int = 50
    fd_step: float = 1e-6
    damping: float = 0.5
    max_halvings: int = 20

    def __post_init__(self):
        if not (self.residual_tol > 0 and self.max_iterations > 0 and self.fd_step > 0):
            raise ValueError("solver settings must be positive")
        if not 0 < self.damping < 1:
            raise ValueError("damping must lie in (0, 1)")


@dataclass
class RefineDiagnostics:
    iterations: int = 0
    residual: float = float("nan")
    subintervals: int = 0
    converged: bool = False
    # (subintervals, max-norm system residual) after every accepted step
    history: list[tuple[int, float]] = field(default_factory=list)


def coefficient_arrays(u, v, L, F=None, Ft=None):
    """Vectorised (u, v) -> (a, b, c, d) map over leading batch axes.

    ``F`` and ``Ft`` are the extension values ``F(p_j, L_j)`` and
    ``F_t(p_j, L_j)``, shape (..., n); they add the corrections that keep the
    quartic terms C1 with vanishing end slopes.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    L = np.asarray(L, dtype=float)
    a = np.concatenate([v[..., :1], u[..., :-1]], axis=-1)
    b = np.concatenate([np.zeros_like(v[..., :1]), v[..., 1:] / L[1:]], axis=-1)
    c = np.empty_like(u)
    d = np.empty_like(u)
    vj = v[..., :-1].copy()
    vj[..., 0] = 0.0
    uprev = np.concatenate([v[..., :1], u[..., :-2]], axis=-1)
    du = u[..., :-1] - uprev
    Lj, Lk = L[:-1], L[1:]
    c[..., :-1] = -(Lj * v[..., 1:] + 2.0 * Lk * vj - 3.0 * Lk * du) / (Lj**2 * Lk)
    d[..., :-1] = (Lj * v[..., 1:] + Lk * vj - 2.0 * Lk * du) / (Lj**3 * Lk)
    c[..., -1] = -(3.0 * u[..., -1] + v[..., -1]) / (2.0 * L[-1] ** 2)
    d[..., -1] = u[..., -1] / L[-1] ** 3
    if F is not None:
        F = np.asarray(F, dtype=float)
        Ft = np.zeros_like(F) if Ft is None else np.asarray(Ft, dtype=float)
        c[..., :-1] += F[..., :-1] * Lj**2 + Ft[..., :-1] * Lj**3
        d[..., :-1] += -2.0 * F[..., :-1] * Lj - Ft[..., :-1] * Lj**2
        c[..., -1] += -2.0 * F[..., -1] * L[-1] ** 2 - Ft[..., -1] * L[-1] ** 3 / 2.0
    return a, b, c, d


def batch_displacements(a, b, c, d, L, m: int, quartic=None) -> np.ndarray:
    """Simpson displacements for batches of coefficient arrays, shape (..., n, 2).

    ``quartic``, if given, is a callable ``s -> F(p_j, s)`` returning the
    extension factor broadcast against ``s`` of shape (..., n, m + 1).
    """
    nodes, w = simpson_rule(m)
    s = np.asarray(L)[:, None] * nodes
    th = a[..., None] + s * (b[..., None] + s * (c[..., None] + s * d[..., None]))
    if quartic is not None:
        th = th + quartic(s) * s**4
    return np.stack([np.cos(th) @ w, np.sin(th) @ w], axis=-1) * np.asarray(L)[:, None]


def coeffs_from_uv(uv: UVParams, lengths, t0: float = 0.0, origin=(0.0, 0.0)) -> AngleSpline:
    """Angle spline for reduced coordinates; always C1 with natural ends."""
    L = np.asarray(lengths, dtype=float)
    a, b, c, d = coefficient_arrays(uv.u, uv.v, L)
    knots = t0 + np.concatenate([[0.0], np.cumsum(L)])
    return AngleSpline(knots, a, b, c, d, origin=origin)


def uv_from_coeffs(spline: AngleSpline, tol: float = 1e-8) -> UVParams:
    """Inverse of ``coeffs_from_uv`` on C1 natural cubic angle splines."""
    if spline.extension is not None:
        raise ExtensionPresent("reduced coordinates are defined for cubic splines only")
    res = spline.continuity_residuals()
    worst = max(res.values())
    if worst > tol:
        raise ContinuityViolated(f"spline violates continuity/end identities by {worst:.3g}")
    L = spline.lengths
    v = spline.b * L
    v[0] = spline.a[0]
    u = np.append(spline.a[1:], spline.d[-1] * L[-1] ** 3)
    return UVParams(u, v)


def segment_displacement(spline: AngleSpline, j: int, quad: QuadratureConfig | None = None) -> np.ndarray:
    """Composite Simpson value of the integral of exp(i theta_j) over segment ``j`` (0-based)."""
    quad = quad or QuadratureConfig()
    if not 0 <= j < spline.n:
        raise IndexError(f"segment index {j} out of range")
    nodes, w = simpson_rule(quad.simpson_subintervals)
    L = spline.lengths[j]
    th = spline.local_theta(np.array([j]), (L * nodes)[None, :])[0]
    return L * np.array([np.cos(th) @ w, np.sin(th) @ w])


class _System:
    """Knot-gap equations in (u, v) at a fixed Simpson resolution."""

    def __init__(self, problem: InterpolationProblem):
        self.L = problem.lengths
        self.gaps = problem.gaps
        self.n = problem.n

    def __call__(self, X, m: int) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        n = self.n
        a, b, c, d = coefficient_arrays(X[..., :n], X[..., n:], self.L)
        z = batch_displacements(a, b, c, d, self.L, m)
        return (z - self.gaps).reshape(X.shape[:-1] + (2 * n,))


def fd_jacobian(fun, x: np.ndarray, h: float) -> np.ndarray:
    """Central-difference Jacobian of a batch-capable ``fun``."""
    k = len(x)
    E = h * np.eye(k)
    F = fun(np.concatenate([x + E, x - E]))
    return (F[:k] - F[k:]).T / (2.0 * h)


def newton_solve(fun, x, solver: SolverConfig, target: float, budget: int, history=None, label=0):
    """Damped Newton on ``fun(x) = 0`` (max norm), stopping at ``target``.

    Returns ``(x, max_residual, iterations)``; stops early when backtracking
    can no longer reduce the residual.
    """
    F = fun(x)
    res = np.abs(F).max()
    it = 0
    while res > target and it < budget:
        J = fd_jacobian(fun, x, solver.fd_step)
        try:
            if not np.all(np.isfinite(J)) or np.linalg.cond(J) > 1e14:
                raise np.linalg.LinAlgError
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            raise SingularJacobian(f"Jacobian singular at residual {res:.3g}") from None
        lam = 1.0
        for _ in range(solver.max_halvings + 1):
            x_new = x + lam * dx
            F_new = fun(x_new)
            res_new = np.abs(F_new).max()
            if res_new < res:
                break
            lam *= solver.damping
        else:
            return x, res, it
        x, F, res = x_new, F_new, res_new
        it += 1
        if history is not None:
            history.append((label, float(res)))
    return x, res, it


def refine(
    estimate: AngleSpline,
    problem: InterpolationProblem,
    quad: QuadratureConfig | None = None,
    solver: SolverConfig | None = None,
) -> tuple[AngleSpline, RefineDiagnostics]:
    """Newton refinement of an estimate until it interpolates the waypoints.

    The residual is measured at four times the working Simpson resolution.
    When the discrete system is solved but that residual is still above
    ``residual_tol`` the resolution is doubled, up to the cap.  Raises
    ``NoConvergence`` (carrying the best spline) when the iteration budget or
    the cap is exhausted, ``SingularJacobian`` on a degenerate Jacobian.
    """
    quad = quad or QuadratureConfig()
    solver = solver or SolverConfig()
    L = problem.lengths
    T0 = float(problem.times[0])
    origin = problem.waypoints[0]
    n = problem.n
    system = _System(problem)
    x = uv_from_coeffs(estimate).vector
    diag = RefineDiagnostics()
    m = quad.simpson_subintervals
    inner_tol = solver.residual_tol / (4.0 * n)

    def measured(x, m):
        spline = coeffs_from_uv(UVParams.from_vector(x), L, T0, origin)
        return spline, interpolation_residual(spline, problem, QuadratureConfig(m, m))

    spline, res = measured(x, m)
    while True:
        if res <= solver.residual_tol:
            diag.residual, diag.subintervals, diag.converged = res, m, True
            return spline, diag
        budget = solver.max_iterations - diag.iterations
        if budget <= 0:
            break
        # no point solving the discrete system far below its own quadrature error
        disc_err = np.abs(system(x, m) - system(x, 2 * m)).max()
        target = max(inner_tol, 1e-2 * disc_err)
        x, _, it = newton_solve(
            lambda X: system(X, m), x, solver, target, budget, diag.history, label=m
        )
        diag.iterations += it
        spline, res = measured(x, m)
        if res <= solver.residual_tol:
            continue
        if 2 * m > quad.max_subintervals:
            break
        m *= 2
    diag.residual, diag.subintervals = res, m
    raise NoConvergence(
        f"refinement stopped at residual {res:.3g} after {diag.iterations} iterations "
        f"with {m} Simpson subintervals",
        best=spline,
        residual=res,
        iterations=diag.iterations,
    )
