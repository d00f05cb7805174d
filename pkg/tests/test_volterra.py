import math

import numpy as np
import pytest
from scipy.special import erfcx

from fracspl import volterra


def test_weights_reproduce_integral_of_one():
    # the rule integrates 1 exactly: h^a/Gamma(a+2) * total weight = (n h)^a / Gamma(a+1)
    for order in (0.3, 1.0, 1.7):
        start, history = volterra.product_trapezoid_weights(order, 50)
        for n in (1, 10, 50):
            total = start[n - 1] + history[1:n].sum() + 1.0
            assert total == pytest.approx((order + 1) * n**order, rel=1e-12)


def test_exponential():
    t, y = volterra.solve_multiterm((1.0,), (-1.0,), 1.0, 1.0, 4096)
    assert y == pytest.approx(np.exp(-t), abs=1e-8)


def test_erfcx_convergence():
    errors = []
    for n in (256, 1024, 4096):
        t, y = volterra.solve_multiterm((0.5,), (-1.0,), 1.0, 1.0, n)
        errors.append(np.max(np.abs(y - erfcx(np.sqrt(t)))))
    assert errors[2] < errors[1] < errors[0]


def test_multiterm_path_initial_value():
    t, e = volterra.multiterm_path((1.5, 0.5), (-1.0, -1.0), 2.0, 1.0, 64)
    assert e[0] == pytest.approx(1 / math.gamma(2.0))


def test_rejects_small_beta():
    with pytest.raises(ValueError):
        volterra.solve_multiterm((0.5,), (-1.0,), 0.5, 1.0, 16)


def test_default_steps_scale():
    assert volterra.default_steps((0.5,), (-1.0,), 1.0) == 4096
    assert volterra.default_steps((0.5,), (-1e3,), 1.0) > 4096
