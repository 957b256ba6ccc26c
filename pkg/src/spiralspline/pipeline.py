"""Branch enumeration and orchestration.

``run`` validates the data once, then estimates, refines and optionally
optimises every selected branch.  Branches are independent, so refinement
and optimisation fan out over a process pool; the report is assembled in the
parent in a fixed order so the result does not depend on scheduling.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .errors import NoConvergence, SpiralSplineError
from .estimator import all_sigmas, as_sigma, estimate, index_from_sigma
from .geometry import ChordData, InterpolationProblem, ValidationConfig, elastic_energy, validate
from .optimizer import FAMILIES, optimize_energy
from .quadrature import QuadratureConfig
from .refiner import SolverConfig, refine
from .results import BranchResult

MODES = ("estimate", "refine", "optimize")
WORKERS_ENV = "SPIRALSPLINE_WORKERS"


@dataclass(frozen=True)
class RunRequest:
    """What to compute and how.

    Exactly one branch selector applies: explicit ``sigmas``, else ``top_k``
    (the k lowest estimate energies), else all 2**n branches.
    """

    problem: InterpolationProblem
    mode: str = "refine"
    sigmas: tuple[tuple[int, ...], ...] | None = None
    top_k: int | None = None
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    validation: ValidationConfig = field(default_factory=ValidationConfig)
    family: str = "constant"
    sample_count: int = 50
    svg: bool = False
    workers: int | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.sample_count < 2:
            raise ValueError("sample_count must be at least 2")
        if self.top_k is not None and self.top_k < 1:
            raise ValueError("top_k must be positive")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown extension family {self.family!r}")
        if self.sigmas is not None:
            n = self.problem.n
            clean = tuple(tuple(int(x) for x in as_sigma(s, n)) for s in self.sigmas)
            object.__setattr__(self, "sigmas", clean)

    @property
    def select_all(self) -> bool:
        return self.sigmas is None and self.top_k is None


@dataclass
class RunReport:
    request: RunRequest
    chord: ChordData
    branches: list[BranchResult]
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def rows(self) -> list[BranchResult]:
        """Successful branches, lowest energy first."""
        ok = [b for b in self.branches if b.ok]
        return sorted(ok, key=lambda b: (b.energy, b.index))

    @property
    def failures(self) -> list[BranchResult]:
        return [b for b in self.branches if not b.ok]


def _fail(br: BranchResult, exc: SpiralSplineError) -> BranchResult:
    br.error_kind = exc.kind
    br.error = str(exc)
    if isinstance(exc, NoConvergence):
        br.residual = exc.residual
        br.iterations = exc.iterations
    return br


def _estimate_branch(chord: ChordData, p: int, sigma) -> BranchResult:
    br = BranchResult(p, tuple(sigma))
    t = time.perf_counter()
    try:
        br.estimate = estimate(chord, sigma)
        br.estimate_energy = elastic_energy(br.estimate)
    except SpiralSplineError as exc:
        _fail(br, exc)
    br.timings["estimate"] = time.perf_counter() - t
    return br


def _finish_branch(args) -> BranchResult:
    br, problem, mode, quad, solver, family = args
    if not br.ok or mode == "estimate":
        return br
    t = time.perf_counter()
    try:
        br.refined, diag = refine(br.estimate, problem, quad, solver)
        br.refined_energy = elastic_energy(br.refined)
        br.residual, br.iterations, br.subintervals = diag.residual, diag.iterations, diag.subintervals
    except SpiralSplineError as exc:
        br.timings["refine"] = time.perf_counter() - t
        return _fail(br, exc)
    br.timings["refine"] = time.perf_counter() - t
    if mode == "optimize":
        t = time.perf_counter()
        try:
            br.optimized, br.optimized_energy = optimize_energy(br, problem, FAMILIES[family](), quad, solver)
        except SpiralSplineError as exc:
            _fail(br, exc)
        br.timings["optimize"] = time.perf_counter() - t
    return br


def worker_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, requested)
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run(request: RunRequest) -> RunReport:
    """Execute the pipeline; per-branch errors land in the report.

    Validation errors are global and propagate.
    """
    t_start = time.perf_counter()
    problem = request.problem
    chord = validate(problem, request.validation)
    t_valid = time.perf_counter()

    if request.sigmas is not None:
        chosen: Sequence = [(index_from_sigma(s), s) for s in request.sigmas]
    else:
        chosen = list(all_sigmas(problem.n))
    branches = [_estimate_branch(chord, p, s) for p, s in chosen]
    if request.top_k is not None:
        ok = sorted((b for b in branches if b.ok), key=lambda b: (b.estimate_energy, b.index))
        branches = sorted(ok[: request.top_k], key=lambda b: b.index)
    t_est = time.perf_counter()

    jobs = [(b, problem, request.mode, request.quad, request.solver, request.family) for b in branches]
    workers = min(worker_count(request.workers), len(jobs))
    if request.mode == "estimate" or workers <= 1:
        branches = [_finish_branch(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            branches = list(pool.map(_finish_branch, jobs))
    t_end = time.perf_counter()

    return RunReport(
        request,
        chord,
        branches,
        timings={
            "validate": t_valid - t_start,
            "estimate": t_est - t_valid,
            "solve": t_end - t_est,
            "total": t_end - t_start,
        },
    )
