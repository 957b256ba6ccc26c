from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularSystem


@dataclass(frozen=True, eq=False)
class TridiagonalSystem:
    """``A x = rhs`` with A given by its three diagonals.

    ``sub[i]`` sits at row i+1, column i; ``sup[i]`` at row i, column i+1.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        for name in ("sub", "diag", "sup", "rhs"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = len(self.diag)
        if n == 0 or len(self.sub) != n - 1 or len(self.sup) != n - 1 or len(self.rhs) != n:
            raise ValueError("inconsistent tridiagonal dimensions")

    @property
    def n(self) -> int:
        return len(self.diag)

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sub, -1) + np.diag(self.sup, 1)

    def is_diagonally_dominant(self) -> bool:
        off = np.zeros(self.n)
        off[1:] += np.abs(self.sub)
        off[:-1] += np.abs(self.sup)
        return bool(np.all(np.abs(self.diag) > off))


def solve_tridiagonal(sys: TridiagonalSystem) -> np.ndarray:
    """Thomas algorithm, no pivoting.

    Safe for strictly diagonally dominant matrices, which is all this package
    builds.  A zero pivot raises ``SingularSystem``.
    """
    n = sys.n
    sub, diag, sup = sys.sub, sys.diag, sys.sup
    cp = np.empty(max(n - 1, 0))
    dp = np.empty(n)

    piv = diag[0]
    if piv == 0.0:
        raise SingularSystem("zero pivot in row 0")
    if n > 1:
        cp[0] = sup[0] / piv
    dp[0] = sys.rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - sub[i - 1] * cp[i - 1]
        if piv == 0.0 or not np.isfinite(piv):
            raise SingularSystem(f"zero pivot in row {i}")
        if i < n - 1:
            cp[i] = sup[i] / piv
        dp[i] = (sys.rhs[i] - sub[i - 1] * dp[i - 1]) / piv

    x = dp
    for i in range(n - 2, -1, -1):
        x[i] -= cp[i] * x[i + 1]
    return x
