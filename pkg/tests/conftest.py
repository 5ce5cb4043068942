import math

import pytest

from trilayer.model import canonical_config


@pytest.fixture(scope="session")
def cfg():
    """Canonical linear configuration shared across the suite (warm caches)."""
    return canonical_config(sigma_bar=2.0, R0=1.0)


def central_diff(f, x, h):
    return (f(x + h) - f(x - h)) / (2.0 * h)


def bisect_root(f, lo, hi, iters=200):
    """Plain bisection, used to freeze closed-form oracle roots independently."""
    flo = f(lo)
    assert flo * f(hi) < 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) * flo > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sinh_ratio_root(ratio):
    """Solve sinh(x)/x = ratio for x > 0 by bisection on the closed form."""
    return bisect_root(lambda x: math.sinh(x) / x - ratio, 1e-6, 50.0)
