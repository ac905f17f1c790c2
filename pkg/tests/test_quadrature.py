import math

import numpy as np
import pytest

from melnikov.quadrature import tanh_sinh


def test_polynomial():
    r = tanh_sinh(lambda x, da, db: x**3 - 2 * x, 0.0, 2.0, tol=1e-13)
    assert r.converged
    assert r.value == pytest.approx(0.0, abs=1e-13)
    r = tanh_sinh(lambda x, da, db: x**2, 1.0, 4.0, tol=1e-13)
    assert r.value == pytest.approx(21.0, rel=1e-14)


def test_inverse_square_root_endpoints():
    # int_{-1}^{1} dx / sqrt(1 - x^2) = pi, using the exact gaps
    r = tanh_sinh(lambda x, da, db: 1.0 / np.sqrt(da * db), -1.0, 1.0, tol=1e-13)
    assert r.value == pytest.approx(math.pi, rel=1e-13)


def test_log_singularity():
    r = tanh_sinh(lambda x, da, db: np.log(da), 0.0, 1.0, tol=1e-12)
    assert r.value == pytest.approx(-1.0, rel=1e-12)


def test_degenerate_and_reversed_intervals():
    assert tanh_sinh(lambda x, da, db: x, 1.0, 1.0).value == 0.0
    with pytest.raises(ValueError):
        tanh_sinh(lambda x, da, db: x, 2.0, 1.0)


def test_reports_evaluations_and_error():
    r = tanh_sinh(lambda x, da, db: np.exp(x), 0.0, 1.0, tol=1e-12)
    assert r.evaluations > 0
    assert r.error_estimate < 1e-10
    assert r.value == pytest.approx(math.e - 1, rel=1e-14)
