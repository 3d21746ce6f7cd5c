"""Primitive trig integrals and the TrigSignal algebra against quadrature."""

import math

import numpy as np
import pytest

from beamctl.trig import (
    TrigSignal,
    int_cos,
    int_sin,
    int_t2cos,
    int_t2sin,
    int_tcos,
    int_tsin,
    nearly_equal,
)
from oracles import quad_integral

_PRIMS = {
    int_cos: lambda x: (lambda t: math.cos(x * t)),
    int_sin: lambda x: (lambda t: math.sin(x * t)),
    int_tcos: lambda x: (lambda t: t * math.cos(x * t)),
    int_tsin: lambda x: (lambda t: t * math.sin(x * t)),
    int_t2cos: lambda x: (lambda t: t * t * math.cos(x * t)),
    int_t2sin: lambda x: (lambda t: t * t * math.sin(x * t)),
}


@pytest.mark.parametrize("prim", list(_PRIMS), ids=lambda f: f.__name__)
def test_primitives_match_quadrature(prim):
    rng = np.random.default_rng(101)
    make = _PRIMS[prim]
    for _ in range(60):
        x = float(rng.uniform(-80.0, 80.0))
        T = float(rng.uniform(0.1, 3.0))
        ref = quad_integral(make(x), 0.0, T)
        got = prim(x, T)
        assert got == pytest.approx(ref, rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("prim", list(_PRIMS), ids=lambda f: f.__name__)
def test_primitives_series_seam(prim):
    # the closed form and the power series must agree across |x|T = 0.5
    make = _PRIMS[prim]
    T = 1.0
    for x in np.linspace(0.40, 0.60, 41):
        ref = quad_integral(make(float(x)), 0.0, T)
        assert prim(float(x), T) == pytest.approx(ref, rel=1e-13, abs=1e-16)


def test_primitives_at_zero_frequency():
    T = 1.7
    assert int_cos(0.0, T) == T
    assert int_sin(0.0, T) == 0.0
    assert int_tcos(0.0, T) == pytest.approx(T * T / 2, rel=1e-15)
    assert int_tsin(0.0, T) == 0.0
    assert int_t2cos(0.0, T) == pytest.approx(T**3 / 3, rel=1e-15)
    assert int_t2sin(0.0, T) == 0.0


def test_primitives_vectorized_match_scalar():
    rng = np.random.default_rng(7)
    x = rng.uniform(-40.0, 40.0, size=50)
    x[::7] = 0.0
    T = rng.uniform(0.2, 2.5, size=50)
    for prim in _PRIMS:
        vec = prim(x, T)
        scal = np.array([prim(float(a), float(b)) for a, b in zip(x, T)])
        np.testing.assert_array_equal(vec, scal)


def test_nearly_equal():
    assert nearly_equal(100.0, 100.0 + 1e-8)
    assert not nearly_equal(100.0, 100.1)
    assert nearly_equal(0.0, 1e-10)  # absolute floor near zero


def test_signal_eval_and_structural_zeros():
    s = TrigSignal()
    s.add(2.0, "cos", 1.5).add(3.0, "tsin", -0.5)
    t = 0.7
    assert s(t) == pytest.approx(1.5 * math.cos(2 * t) - 0.5 * t * math.sin(3 * t), rel=1e-15)
    # sin(0 t) terms vanish identically and must not be stored
    z = TrigSignal().add(0.0, "sin", 4.0).add(0.0, "tsin", 4.0).add(1.0, "cos", 0.0)
    assert z.terms == {}
    with pytest.raises(ValueError):
        TrigSignal().add(1.0, "cosh", 1.0)


def test_signal_deriv_matches_finite_difference():
    rng = np.random.default_rng(11)
    s = TrigSignal()
    for kind in ("cos", "sin", "tcos", "tsin"):
        s.add(float(rng.uniform(0.5, 20.0)), kind, float(rng.standard_normal()))
    d = s.deriv()
    h = 1e-6
    for t in (0.3, 1.1, 2.4):
        fd = (s(t + h) - s(t - h)) / (2 * h)
        assert d(t) == pytest.approx(fd, rel=1e-8, abs=1e-8)


def test_signal_integral_product_matches_quadrature():
    rng = np.random.default_rng(13)
    kinds = ("cos", "sin", "tcos", "tsin")
    for _ in range(25):
        a = TrigSignal()
        b = TrigSignal()
        for sig in (a, b):
            for _ in range(3):
                sig.add(
                    float(rng.uniform(0.0, 60.0)),
                    kinds[rng.integers(0, 4)],
                    float(rng.standard_normal()),
                )
        T = float(rng.uniform(0.5, 2.5))
        ref = quad_integral(lambda t: a(t) * b(t), 0.0, T)
        assert a.integral_product(b, T) == pytest.approx(ref, rel=1e-11, abs=1e-12)
        ref1 = quad_integral(a, 0.0, T)
        assert a.integral(T) == pytest.approx(ref1, rel=1e-11, abs=1e-12)


def test_signal_add_and_scale():
    a = TrigSignal().add(2.0, "cos", 1.0)
    b = TrigSignal().add(2.0, "cos", 0.5).add(4.0, "sin", 2.0)
    c = a + b
    assert c.terms[(2.0, "cos")] == 1.5
    assert c.terms[(4.0, "sin")] == 2.0
    assert a.scaled(-2.0).terms[(2.0, "cos")] == -2.0
    # operands unchanged
    assert a.terms == {(2.0, "cos"): 1.0}
