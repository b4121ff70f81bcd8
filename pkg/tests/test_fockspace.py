import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zfqft import smatrix
from zfqft.fockspace import (
    FockSpace,
    FockState,
    RapidityGrid,
    TruncationWarning,
    load_state,
    save_state,
    verify_zf_relations,
)

GRID = RapidityGrid(-2.0, 2.0, 5, 1.0)


def small_space(S=None, n_max=3):
    return FockSpace(GRID, S or smatrix.sinh_factor(0.6), n_max=n_max)


def random_state(space, rng, n_top=2, symmetric=False):
    sectors = {}
    for n in range(n_top + 1):
        t = rng.normal(size=(space.grid.n_points,) * n) + 1j * rng.normal(
            size=(space.grid.n_points,) * n
        )
        sectors[n] = space.s_symmetrize(t) if symmetric and n >= 2 else t
    return FockState(sectors)


def test_grid_validation():
    with pytest.raises(ValueError):
        RapidityGrid(1.0, -1.0, 8, 1.0)
    with pytest.raises(ValueError):
        RapidityGrid(-1.0, 1.0, 1, 1.0)
    with pytest.raises(ValueError):
        RapidityGrid(-1.0, 1.0, 8, 0.0)


def test_grid_nodes_and_momenta():
    g = RapidityGrid(-1.0, 1.0, 5, 2.0)
    assert g.spacing == pytest.approx(0.5)
    assert np.allclose(g.p0, 2.0 * np.cosh(g.nodes))
    assert np.allclose(g.p1, 2.0 * np.sinh(g.nodes))


def test_symmetrizer_is_projection():
    space = small_space()
    rng = np.random.default_rng(0)
    for n in (2, 3):
        t = rng.normal(size=(5,) * n) + 1j * rng.normal(size=(5,) * n)
        once = space.s_symmetrize(t)
        twice = space.s_symmetrize(once)
        assert np.max(np.abs(twice - once)) < 1e-13


def test_symmetrizer_is_selfadjoint():
    space = small_space()
    rng = np.random.default_rng(1)
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    b = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    lhs = np.vdot(space.s_symmetrize(a), b)
    rhs = np.vdot(a, space.s_symmetrize(b))
    assert abs(lhs - rhs) < 1e-13


def test_projector_block_matches_columnwise_symmetrization():
    space = small_space()
    M = space.grid.n_points
    for n in (1, 2, 3):
        block = space.projector_block(n)
        for idx in itertools.product(range(M), repeat=n):
            unit = np.zeros((M,) * n, dtype=complex)
            unit[idx] = 1.0
            col = block[(Ellipsis,) + idx]
            assert np.max(np.abs(col - space.s_symmetrize(unit))) < 1e-14


def test_create_annihilate_adjoint():
    space = small_space()
    rng = np.random.default_rng(2)
    psi = rng.normal(size=5) + 1j * rng.normal(size=5)
    # z and z+ are mutually adjoint on the S-symmetric subspace
    a = random_state(space, rng, symmetric=True)
    b = random_state(space, rng, symmetric=True)
    lhs = space.inner(space.create(psi, a, warn_overflow=False), b)
    rhs = space.inner(a, space.annihilate(np.conj(psi), b))
    assert abs(lhs - rhs) < 1e-12


def test_basis_orthonormal():
    space = small_space()
    picks = [(0, ()), (1, (2,)), (2, (1, 3)), (2, (3, 1))]
    for (n1, i1) in picks:
        for (n2, i2) in picks:
            val = space.inner(space.basis_state(n1, i1), space.basis_state(n2, i2))
            expect = 1.0 if (n1, i1) == (n2, i2) else 0.0
            assert abs(val - expect) < 1e-13


def test_coords_roundtrip():
    space = small_space()
    rng = np.random.default_rng(3)
    state = random_state(space, rng, n_top=3)
    vec = space.to_coords(state)
    back = space.from_coords(vec)
    for n in range(4):
        assert np.allclose(back.sector(n, 5), state.sector(n, 5))
    assert abs(np.vdot(vec, vec).real - space.inner(state, state).real) < 1e-12


def test_truncation_warning():
    space = small_space(n_max=3)
    top = FockState({3: np.ones((5, 5, 5))})
    with pytest.warns(TruncationWarning):
        space.create(np.ones(5), top)


def test_vacuum_annihilated():
    space = small_space()
    out = space.annihilate(np.ones(5), space.vacuum())
    assert not out.sectors


def test_number_operator_on_basis():
    space = small_space()
    st2 = space.basis_state(2, (0, 4))
    out = space.number()(st2)
    assert np.allclose(out.sectors[2], 2.0 * st2.sectors[2])


def test_reflection_antiunitary_involution():
    space = small_space()
    rng = np.random.default_rng(4)
    state = random_state(space, rng)
    J = space.reflect()
    back = J(J(state))
    for n, t in state.sectors.items():
        assert np.allclose(back.sectors[n], t)


def test_translate_is_diagonal_phase():
    space = small_space()
    st1 = space.one_particle(np.ones(5, dtype=complex))
    out = space.translate((0.7, -0.3))(st1)
    expect = np.exp(1j * (space.grid.p0 * 0.7 + space.grid.p1 * 0.3))
    assert np.allclose(out.sectors[1], expect)


@settings(deadline=None, max_examples=10)
@given(b=st.floats(min_value=0.2, max_value=1.3))
def test_zf_relations_small_grid(b):
    space = FockSpace(GRID, smatrix.sinh_factor(b), n_max=3)
    rep = verify_zf_relations(space, tol=1e-12)
    assert rep.passed, rep.residuals


def test_zf_relations_needs_truncation_room():
    with pytest.raises(ValueError):
        verify_zf_relations(small_space(n_max=2))


def test_zf_relations_match_dense_matrices():
    """The slice-based residuals agree with an explicit matrix construction."""
    space = small_space(S=smatrix.sinh_product((0.5, 0.8)))
    rep = verify_zf_relations(space)
    theta = space.grid.nodes
    d = space.grid.spacing
    proj = space.symmetrizer()
    i, j = rep.sample_nodes[0], rep.sample_nodes[-1]
    s_ij = complex(space.S(theta[i] - theta[j]))
    lhs = (space.kernel_z(i) @ space.kernel_z(j)
           - s_ij * (space.kernel_z(j) @ space.kernel_z(i))) @ proj
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        m = space.matrix(lhs, space.n_max)
    assert float(np.linalg.norm(m)) <= rep.residuals["annihilator_exchange"] + 1e-13


def test_state_dump_roundtrip(tmp_path):
    space = small_space()
    rng = np.random.default_rng(5)
    state = random_state(space, rng, n_top=3)
    path = tmp_path / "state.zfqf"
    save_state(path, state, space)
    loaded, header = load_state(path)
    assert header == {"version": 1, "n_points": 5, "n_max": 3}
    for n in range(4):
        assert np.array_equal(loaded.sector(n, 5), state.sector(n, 5))


def test_state_dump_magic(tmp_path):
    path = tmp_path / "bogus.bin"
    path.write_bytes(b"NOPE" + b"\x00" * 64)
    with pytest.raises(ValueError, match="ZFQF"):
        load_state(path)


def test_grade_residual_tags():
    space = small_space()
    res = space.grade_residual(space.zdag(np.ones(5)))
    assert res["anticommutator"] < 1e-12
    assert res["commutator"] > 0.1
