import numpy as np
import pytest

from zfqft import smatrix
from zfqft.fields import (
    SupportViolationError,
    TestFunction,
    WrongScatteringError,
    graded_commutator_norm,
    majorana,
    majorana_amplitude,
    mass_shell_restrict,
    phi,
    phi_hat,
    phi_prime,
    twist_identity_residual,
    wedge_locality_report,
)
from zfqft.fockspace import FockSpace, RapidityGrid

GRID = RapidityGrid(-2.0, 2.0, 8, 1.0)


def test_test_function_validation():
    with pytest.raises(ValueError):
        TestFunction("triangle")
    with pytest.raises(ValueError):
        TestFunction("gaussian", width=(0.0, 0.3))


@pytest.mark.parametrize("kind", ["gaussian", "bump"])
def test_reality_of_transform(kind):
    f = TestFunction(kind, center=(0.4, -0.2), width=(0.5, 0.7))
    assert f.reality_residual() < 1e-10


def test_gaussian_transform_normalization():
    f = TestFunction("gaussian", width=(0.5, 0.8))
    assert f.fourier(0.0, 0.0) == pytest.approx(0.4)


def test_bump_transform_entire_in_momentum():
    """Compact support means the transform extends to complex momenta."""
    f = TestFunction("bump", width=(1.0, 1.0))
    val = f.fourier(0.3 + 0.2j, -0.1 + 0.5j)
    assert np.isfinite(val.real) and np.isfinite(val.imag)
    # agreement with the real-axis value in the limit of zero imaginary part
    assert f.fourier(0.3 + 0j, -0.1 + 0j) == pytest.approx(f.fourier(0.3, -0.1))


def test_translated_and_reflected():
    f = TestFunction("gaussian", center=(0.1, 0.2))
    assert f.translated((1.0, -1.0)).center == (1.1, -0.8)
    assert f.reflected().center == (-0.1, -0.2)


def test_mass_shell_restrict_sign():
    f = TestFunction("gaussian", center=(0.3, 0.1))
    plus = mass_shell_restrict(GRID, f, +1)
    minus = mass_shell_restrict(GRID, f, -1)
    assert np.max(np.abs(minus - np.conj(plus))) < 1e-12
    with pytest.raises(ValueError):
        mass_shell_restrict(GRID, f, 0)


def test_phi_is_odd_and_selfadjoint_like():
    space = FockSpace(GRID, smatrix.sinh_factor(0.7), n_max=3)
    f = TestFunction("gaussian", width=(0.4, 0.4))
    op = phi(space, f)
    assert op.grade == "odd"
    res = space.grade_residual(op)
    assert res["anticommutator"] < 1e-12


def test_twist_identity():
    space = FockSpace(GRID, smatrix.constant(-1), n_max=3)
    f = TestFunction("gaussian", width=(0.4, 0.4))
    assert twist_identity_residual(space, f) < 1e-12


def test_majorana_requires_minus_one():
    space = FockSpace(GRID, smatrix.constant(1), n_max=3)
    f = TestFunction("gaussian")
    with pytest.raises(WrongScatteringError):
        majorana(space, f, +1)


def test_majorana_amplitude_boundary_phase():
    """The chiral phase aligns the i pi boundary value with the conjugate."""
    f = TestFunction("gaussian", width=(0.4, 0.4))
    for comp in (1, -1):
        theta = GRID.nodes
        u = majorana_amplitude(GRID, f, comp)
        phase = np.exp(1j * np.pi * (-2 + comp) / 4.0)
        shifted = (
            phase
            * np.exp(comp * (theta + 1j * np.pi) / 2.0)
            * np.asarray(f.fourier(-GRID.p0, -GRID.p1))
        )
        assert np.max(np.abs(shifted - np.conj(u))) < 1e-12


def test_graded_commutator_needs_odd():
    space = FockSpace(GRID, smatrix.constant(-1), n_max=3)
    from zfqft.fields import GradeMismatchError

    with pytest.raises(GradeMismatchError):
        graded_commutator_norm(space, space.number(), space.number())


def test_support_violation():
    space = FockSpace(GRID, smatrix.constant(-1), n_max=3)
    wide = TestFunction("gaussian", width=(3.0, 3.0))
    with pytest.raises(SupportViolationError):
        wedge_locality_report(space, wide, wide, [0.0, 0.5])


def test_locality_decay_small_grid():
    grid = RapidityGrid(-2.0, 2.0, 12, 1.0)
    space = FockSpace(grid, smatrix.constant(-1), n_max=3)
    f = TestFunction("gaussian", center=(0.15, 0.0), width=(0.5, 0.5))
    g = TestFunction("gaussian", width=(0.5, 0.5))
    rep = wedge_locality_report(space, f, g, [0.0, 8.0], mode="twisted")
    assert rep.decay_factor > 10.0
    rep_m = wedge_locality_report(space, f, g, [0.0, 8.0], mode="majorana")
    # the quadrature floor at 12 points limits the majorana channel
    assert rep_m.decay_factor > 5.0


def test_phi_prime_commutes_with_phi_weakly():
    """Spacelike separation shrinks the twisted commutator even coarsely."""
    grid = RapidityGrid(-2.0, 2.0, 12, 1.0)
    space = FockSpace(grid, smatrix.sinh_factor(0.7), n_max=3)
    f = TestFunction("gaussian", center=(0.15, 0.0), width=(0.5, 0.5))
    A = phi(space, f)

    def comm_at(d):
        g = TestFunction("gaussian", center=(0.0, d), width=(0.5, 0.5))
        B = phi_hat(space, g)
        B.grade = "odd"
        return graded_commutator_norm(space, A, B)

    assert comm_at(6.0) < comm_at(0.0) / 10.0
