"""Per-branch result record shared by the optimizer and the pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field

from .geometry import AngleSpline


@dataclass
class BranchResult:
    """Everything computed for one sign vector.

    ``error_kind`` is ``None`` on success; otherwise the stage that failed
    left its spline fields unset and ``error`` holds the message.
    """

    index: int
    sigma: tuple[int, ...]
    estimate: AngleSpline | None = None
    refined: AngleSpline | None = None
    optimized: AngleSpline | None = None
    estimate_energy: float | None = None
    refined_energy: float | None = None
    optimized_energy: float | None = None
    residual: float | None = None
    iterations: int = 0
    subintervals: int = 0
    error_kind: str | None = None
    error: str | None = None
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.error_kind is None

    @property
    def final(self) -> AngleSpline | None:
        """Most processed spline available."""
        return self.optimized or self.refined or self.estimate

    @property
    def energy(self) -> float | None:
        for e in (self.optimized_energy, self.refined_energy, self.estimate_energy):
            if e is not None:
                return e
        return None
