import numpy as np
import pytest

from blockboot.series import Ar1Model, simulate_ar1


@pytest.fixture
def four():
    return np.array([1.0, 2.0, 3.0, 4.0])


@pytest.fixture(scope="session")
def ar_path_32():
    return simulate_ar1(Ar1Model(0.5), 32, 7)


def brute_autocov(x, k):
    """Direct double-loop evaluation of r_hat(k), divisor n."""
    n = len(x)
    m = sum(x) / n
    return sum((x[t] - m) * (x[t + k] - m) for t in range(n - k)) / n
