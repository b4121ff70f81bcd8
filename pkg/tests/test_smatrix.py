import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zfqft import smatrix


def test_constant_values():
    assert smatrix.constant(1)(0.3) == 1.0
    assert smatrix.constant(-1)(1j) == -1.0
    with pytest.raises(ValueError):
        smatrix.constant(2)


def test_constant_minus_one_flag():
    assert smatrix.constant(-1).is_constant_minus_one
    assert not smatrix.constant(1).is_constant_minus_one
    assert not smatrix.sinh_factor(0.3).is_constant_minus_one


@settings(deadline=None, max_examples=25)
@given(b=st.floats(min_value=0.05, max_value=1.5))
def test_sinh_factor_symmetries(b):
    S = smatrix.sinh_factor(b)
    samples = smatrix.strip_samples(64, seed=3)
    rep = smatrix.verify_symmetries(S, samples, tol=1e-11)
    assert rep.passed, rep.residuals


def test_product_symmetries():
    S = smatrix.sinh_product((0.4, 0.9, 1.2))
    rep = smatrix.verify_symmetries(S, smatrix.strip_samples(128, seed=1), tol=1e-11)
    assert rep.passed, rep.residuals


def test_sinh_factor_parameter_range():
    for bad in (0.0, -0.2, np.pi / 2):
        with pytest.raises(ValueError):
            smatrix.sinh_factor(bad)


def test_modulus_one_on_real_line():
    S = smatrix.sinh_factor(0.7)
    theta = np.linspace(-4, 4, 101)
    assert np.max(np.abs(np.abs(S(theta)) - 1.0)) < 1e-14


def test_pole_evaluation_guard():
    S = smatrix.sinh_factor(0.5)
    with pytest.raises(smatrix.PoleEvaluationError):
        S(-0.5j)


def test_poles_outside_closed_strip():
    S = smatrix.sinh_product((0.3, 1.1))
    for p in S.poles:
        assert not (0.0 <= p.imag <= np.pi) or abs(p.real) > 0


def test_strip_samples_inside_strip():
    z = smatrix.strip_samples(200, seed=0)
    assert np.all(z.imag > 0.1) and np.all(z.imag < np.pi - 0.1)
    assert len(np.unique(z)) == 200


def test_strip_samples_deterministic():
    a = smatrix.strip_samples(50, seed=9)
    b = smatrix.strip_samples(50, seed=9)
    assert np.array_equal(a, b)


def test_from_config_roundtrip():
    S = smatrix.from_config({"kind": "sinh_factor", "b": 0.6})
    assert S.kind == "sinh_factor" and S.parameters == (0.6,)
    S = smatrix.from_config({"kind": "constant", "value": -1})
    assert S.is_constant_minus_one
    S = smatrix.from_config({"kind": "product", "bs": [0.3, 0.4]})
    assert S.kind == "product"
    with pytest.raises(ValueError):
        smatrix.from_config({"kind": "nope"})


def test_labels():
    assert smatrix.constant(1).label() == "S=+1"
    assert "S_b" in smatrix.sinh_factor(0.5).label()
    assert "S_prod" in smatrix.sinh_product((0.5, 0.6)).label()
