import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zfqft import smatrix
from zfqft.fields import TestFunction, phi
from zfqft.fockspace import FockSpace, RapidityGrid
from zfqft.formfactors import (
    ContourError,
    FormFactorFamily,
    Indicatrix,
    boundary_coefficients,
    boundary_match,
    builtin_family,
    coefficients_from_operator,
    operator_from_coefficients,
    residue_recursion_residual,
    strip_ordered_samples,
    verify_fd,
    verify_fw,
    _neville_to_zero,
)

GRID = RapidityGrid(-1.5, 1.5, 6, 1.0)


def small_space(S=None, n_max=3):
    return FockSpace(GRID, S or smatrix.sinh_factor(0.6), n_max=n_max)


def canonical_coefficients(space, m, n, rng):
    """Random tensor in the canonical class: S-symmetric in the theta
    group, conjugate-S-symmetric in the eta group."""
    M = space.grid.n_points
    t = rng.normal(size=(M,) * (m + n)) + 1j * rng.normal(size=(M,) * (m + n))
    if m >= 2:
        flat = t.reshape((M,) * m + (-1,))
        t = space._sym_batched(flat, m).reshape(t.shape)
    if n >= 2:
        moved = np.moveaxis(t, range(m, m + n), range(n))
        flat = moved.reshape((M,) * n + (-1,))
        sym = np.conj(space._sym_batched(np.conj(flat), n)).reshape(moved.shape)
        t = np.moveaxis(sym, range(n), range(m, m + n))
    return t


def test_indicatrix():
    w = Indicatrix(0.7)
    assert w.subadditivity_residual() == 0.0
    assert w.sublinearity_ratio() < 1e-6
    with pytest.raises(ValueError):
        Indicatrix(-1.0)


def test_neville_exact_for_polynomials():
    eps = [0.1, 0.05, 0.025]
    vals = [3.0 - 2.0 * e + 5.0 * e * e for e in eps]
    assert _neville_to_zero(eps, vals) == pytest.approx(3.0)


def test_family_call_shapes():
    fam = builtin_family("ising-fermion-g")
    Z = np.zeros((4, 3), dtype=complex) + 0.3j
    assert fam(3, Z).shape == (4,)
    assert fam(0, np.zeros((2, 0))) is not None
    with pytest.raises(ValueError):
        fam(2, Z)


def test_even_form_factors_vanish():
    fam = builtin_family("ising-fermion-g")
    assert fam.is_trivial(2) and fam.is_trivial(4)
    assert not fam.is_trivial(1) and not fam.is_trivial(3)


def test_unknown_family():
    with pytest.raises(ValueError):
        builtin_family("nope")


def test_identity_operator_coefficient():
    space = small_space()
    ident = operator_from_coefficients(space, {(0, 0): np.asarray(1.0 + 0j)})
    f00 = coefficients_from_operator(space, ident, 0, 0)
    assert complex(f00) == pytest.approx(1.0)


def test_field_coefficients_are_mass_shell_restrictions():
    space = small_space()
    f = TestFunction("gaussian", width=(0.4, 0.4))
    op = phi(space, f)
    f10 = coefficients_from_operator(space, op, 1, 0)
    f01 = coefficients_from_operator(space, op, 0, 1)
    expect_10 = np.asarray(f.fourier(space.grid.p0, space.grid.p1))
    expect_01 = np.asarray(f.fourier(-space.grid.p0, -space.grid.p1))
    assert np.max(np.abs(f10 - expect_10)) < 1e-12
    assert np.max(np.abs(f01 - expect_01)) < 1e-12


@pytest.mark.parametrize("order", [(1, 0), (0, 1), (1, 1), (2, 0), (0, 2)])
def test_coefficient_roundtrip(order):
    space = small_space()
    rng = np.random.default_rng(sum(order))
    m, n = order
    f = canonical_coefficients(space, m, n, rng)
    A = operator_from_coefficients(space, {(m, n): f})
    back = coefficients_from_operator(space, A, m, n)
    assert np.max(np.abs(back - f)) < 1e-12 * max(np.max(np.abs(f)), 1.0)


def test_roundtrip_mixed_orders():
    space = small_space()
    rng = np.random.default_rng(11)
    coeffs = {
        (0, 0): np.asarray(rng.normal() + 1j * rng.normal()),
        (1, 0): canonical_coefficients(space, 1, 0, rng),
        (1, 1): canonical_coefficients(space, 1, 1, rng),
        (0, 2): canonical_coefficients(space, 0, 2, rng),
    }
    A = operator_from_coefficients(space, coeffs)
    for (m, n), f in coeffs.items():
        back = coefficients_from_operator(space, A, m, n)
        assert np.max(np.abs(back - f)) < 1e-11


def test_strip_ordered_samples_ordering():
    rng = np.random.default_rng(0)
    Z = strip_ordered_samples(4, 30, rng)
    assert Z.shape == (30, 4)
    assert np.all(np.diff(Z.imag, axis=1) > 0)
    assert np.all(Z.imag > 0) and np.all(Z.imag < np.pi)


def test_residue_recursion_analytic():
    """The k=3 contour residue matches the recursion prediction."""
    fam = builtin_family("ising-fermion-g")
    base = np.array([-1.1 + 0.12j, -0.2 + 0.24j, 0.7 + 0.36j])
    rel = residue_recursion_residual(fam, 3, (0, 2), base)
    assert rel < 1e-9


def test_residue_contour_guard():
    fam = builtin_family("ising-fermion-g")
    # two coordinates nearly coincide, so a second declared pole sits on
    # the contour for the (0, 2) residue
    base = np.array([0.0 + 0.1j, 1e-4 + 0.1j, 0.5 + 0.2j])
    with pytest.raises(ContourError):
        residue_recursion_residual(fam, 3, (0, 2), base)


def test_boundary_coefficients_pole_guard():
    space = small_space(S=smatrix.constant(1))
    fam = builtin_family("ising-fermion-g")
    with pytest.raises(ContourError):
        boundary_coefficients(space, fam, [(2, 1)])


def test_boundary_match_free_majorana():
    fam = builtin_family(
        "free-majorana", {"g": TestFunction("gaussian", width=(0.25, 0.25))}
    )
    space = FockSpace(RapidityGrid(-1.5, 1.5, 6, 1.0), fam.S, n_max=3)
    orders = [(1, 0), (0, 1)]
    A = operator_from_coefficients(space, boundary_coefficients(space, fam, orders))
    for (m, n) in orders:
        assert boundary_match(space, fam, A, m, n) < 1e-8


@settings(deadline=None, max_examples=5)
@given(seed=st.integers(min_value=0, max_value=100))
def test_fw_axioms_seed_independent(seed):
    fam = builtin_family("free-majorana")
    rep = verify_fw(fam, k_max=2, n_samples=20, seed=seed)
    assert rep.passed, rep.as_text()


def test_fd_axioms_constant_family_trivial():
    fam = builtin_family("constant", {"value": 2.0})
    rep = verify_fd(fam, k_max=3)
    assert rep.passed
    assert rep.checks[0].name == "trivial-family"


def test_exchange_axiom_fails_for_broken_family():
    """A family violating the exchange relation is detected."""
    S = smatrix.sinh_factor(0.6)
    broken = FormFactorFamily(
        name="nontrivial",
        S=S,
        evaluator=lambda k, Z: np.exp(np.sum(Z, axis=-1)) + Z[..., 0],
    )
    rep = verify_fw(broken, k_max=2, n_samples=20, seed=0)
    assert not rep.passed
