import numpy as np
import pytest

from spiralspline.geometry import InterpolationProblem

# three waypoints; the middle time is 1.1 (with 0.5 the second chord is too long)
EX1_TIMES = (0.0, 0.5, 1.1)
EX1_POINTS = ((0.0, 0.0), (0.48, 0.12), (1.0, 0.0))

EX4_TIMES = (0.0, 0.55, 1.1, 1.7, 2.4, 3.0)
EX4_POINTS = ((0.0, 0.0), (0.5, 0.15), (1.0, 0.0), (1.5, -0.1), (2.0, -0.2), (2.5, -0.5))


def circle_problem(n=7, h=np.pi / 10):
    t = h * np.arange(n + 1)
    return InterpolationProblem(t, np.column_stack([np.cos(t), np.sin(t)]))


@pytest.fixture
def ex1():
    return InterpolationProblem(EX1_TIMES, EX1_POINTS)


@pytest.fixture
def ex4():
    return InterpolationProblem(EX4_TIMES, EX4_POINTS)


@pytest.fixture
def circle():
    return circle_problem()


@pytest.fixture
def rng():
    return np.random.default_rng(20151)


def natural_cubic_problem(n=5, eps=0.2, kappa=1.5, theta0=0.3):
    """Waypoints of the curve with theta' = 6 kappa (t/S)(1 - t/S), S = n eps.

    theta is one cubic on [0, S] with zero end slopes, so the curve is itself
    a natural spiral spline through its samples.  Returns (problem, theta).
    """
    from scipy.integrate import quad

    S = n * eps
    t = eps * np.arange(n + 1)

    def theta(s):
        return theta0 + 6.0 * kappa * (s * s / (2 * S) - s**3 / (3 * S * S))

    pts = []
    for T in t:
        x = quad(lambda s: np.cos(theta(s)), 0, T, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
        y = quad(lambda s: np.sin(theta(s)), 0, T, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
        pts.append((x, y))
    return InterpolationProblem(t, pts), theta


# one PASS/FAIL line per acceptance criterion, printed after the run
VERDICTS = []


def record_verdict(label, ok, detail):
    VERDICTS.append(f"{'PASS' if ok else 'FAIL'}  criterion {label}: {detail}")
    return ok


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
