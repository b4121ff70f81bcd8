"""End-to-end acceptance checks at the published grid sizes and tolerances.

Each test pins one verification pipeline at full working size; the module
tests cover the same code paths on small grids.  Runtime limits are part
of the contract and asserted with a generous wall clock.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from zfqft import smatrix
from zfqft.carlattice import disorder_suite, sin_approximant_bounds
from zfqft.fields import TestFunction, wedge_locality_report
from zfqft.fockspace import FockSpace, FockState, RapidityGrid, verify_zf_relations
from zfqft.formfactors import (
    boundary_coefficients,
    boundary_match,
    builtin_family,
    operator_from_coefficients,
    verify_fd,
    verify_fw,
)
from zfqft.scattering import (
    ChiFilter,
    WavePacket,
    analytic_two_particle_element,
    graded_symmetrizer,
    pfg_residual,
    s_matrix_element,
    tau_independence_residual,
    two_particle_phase,
    w_out,
)


def test_criterion_1_zf_relations():
    """ZF relations: residual < 1e-10, all built-in S, n_points=16, < 30 s."""
    grid = RapidityGrid(-3.0, 3.0, 16, 1.0)
    t0 = time.monotonic()
    for name, factory in smatrix.BUILTIN_FAMILIES.items():
        space = FockSpace(grid, factory(), n_max=3)
        rep = verify_zf_relations(space, tol=1e-10)
        assert rep.passed, (name, rep.residuals)
    assert time.monotonic() - t0 < 30.0


def test_criterion_2_smatrix_symmetries():
    """Symmetry relations: residuals < 1e-12 at 200 strip samples, < 1 s."""
    samples = smatrix.strip_samples(200, seed=0)
    t0 = time.monotonic()
    for name, factory in smatrix.BUILTIN_FAMILIES.items():
        rep = smatrix.verify_symmetries(factory(), samples, tol=1e-12)
        assert rep.passed, (name, rep.residuals)
    assert time.monotonic() - t0 < 1.0


def test_criterion_3_twisted_locality():
    """Anticommutator decay >= 1e3 from d=0 to d=8/mu at n_points=32, < 2 min."""
    grid = RapidityGrid(-2.5, 2.5, 32, 1.0)
    f = TestFunction("gaussian", center=(0.15, 0.0), width=(0.5, 0.5))
    g = TestFunction("gaussian", center=(0.0, 0.0), width=(0.5, 0.5))
    seps = [0.0, 1.0, 2.0, 4.0, 8.0]
    t0 = time.monotonic()
    space = FockSpace(grid, smatrix.sinh_factor(math.pi / 4), n_max=3)
    rep = wedge_locality_report(space, f, g, seps, mode="twisted")
    assert rep.decay_factor >= 1e3, rep.rows
    space_m = FockSpace(grid, smatrix.constant(-1), n_max=3)
    rep_m = wedge_locality_report(space_m, f, g, seps, mode="majorana")
    assert rep_m.decay_factor >= 1e3, rep_m.rows
    assert time.monotonic() - t0 < 120.0


def _element_setup(S, n_points=48):
    grid = RapidityGrid(-2.5, 2.5, n_points, 1.0)
    space = FockSpace(grid, S, n_max=3)
    chi = ChiFilter(rap_lo=-2.0, rap_hi=2.0)
    vecs = [
        WavePacket(k_center=-1.5, k_width=5.0).one_particle_vector(grid),
        WavePacket(k_center=1.5, k_width=5.0).one_particle_vector(grid),
    ]
    return space, chi, vecs


@pytest.mark.parametrize("value,expected", [(1, -1.0), (-1, 1.0)])
def test_criterion_4_constant_elements(value, expected):
    """Two-particle element matches the -S kernel to 5e-3 at n_points=48."""
    space, chi, vecs = _element_setup(smatrix.constant(value))
    elem = s_matrix_element(space, vecs, vecs, chi)
    analytic = analytic_two_particle_element(space, vecs, vecs)
    assert abs(elem - analytic) / abs(analytic) < 5e-3
    phase = two_particle_phase(space, vecs, vecs, chi)
    assert abs(phase - expected) / abs(expected) < 5e-3


def test_criterion_4_sinh_phase():
    """Extracted phase at relative rapidity 1.0 equals -S_b(1.0) to 5e-3."""
    S = smatrix.sinh_factor(math.pi / 4)
    grid = RapidityGrid(-1.2, 1.2, 48, 1.0)
    space = FockSpace(grid, S, n_max=3)
    chi = ChiFilter(rap_lo=-1.0, rap_hi=1.0)
    vecs = [
        WavePacket(k_center=-math.sinh(0.5), k_width=20.0).one_particle_vector(grid),
        WavePacket(k_center=math.sinh(0.5), k_width=20.0).one_particle_vector(grid),
    ]
    extracted = two_particle_phase(space, vecs, vecs, chi)
    expected = -complex(S(1.0))
    assert abs(extracted - expected) / abs(expected) < 5e-3


def test_criterion_5_fermionic_statistics():
    """P_Gamma exchange antisymmetry < 1e-8; norm collapse to 1/n! < 1e-10."""
    space, chi, vecs = _element_setup(smatrix.constant(1))
    grid = space.grid
    stat_vecs = [
        WavePacket(k_center=k, k_width=5.0).one_particle_vector(grid)
        for k in (-1.5, 0.0, 1.5)
    ]
    in_state = w_out(space, vecs, chi, use_pfg=False)
    sym2 = graded_symmetrizer(2)
    PT = sym2.project(np.multiply.outer(stat_vecs[0], stat_vecs[2]))
    PT_swapped = sym2.project(np.multiply.outer(stat_vecs[2], stat_vecs[0]))
    o1 = space.inner(FockState({2: PT}), in_state)
    o2 = space.inner(FockState({2: PT_swapped}), in_state)
    assert abs(o1 + o2) / abs(o1) < 1e-8
    for n in (2, 3):
        sym = graded_symmetrizer(n)
        T = stat_vecs[0]
        for v in stat_vecs[1:n]:
            T = np.multiply.outer(T, v)
        P = sym.project(T)
        nt2 = float(np.real(np.vdot(T, T)))
        np2 = float(np.real(np.vdot(P, P)))
        assert abs(np2 * math.factorial(n) - nt2) / nt2 < 1e-10


def test_criterion_6_pfg_identities():
    """phi(psi)^chi = (2 pi)^2 z+(psi) < 1e-10; tau independence < 1e-8."""
    grid = RapidityGrid(-2.5, 2.5, 20, 1.0)
    space = FockSpace(grid, smatrix.sinh_factor(math.pi / 4), n_max=3)
    chi = ChiFilter(rap_lo=-2.0, rap_hi=2.0)
    packet = WavePacket(k_center=0.5, k_width=5.0)
    psi = packet.one_particle_vector(grid)
    assert pfg_residual(space, psi, chi) < 1e-10
    res = tau_independence_residual(space, psi, packet, chi, taus=(1.0, 5.0, 25.0))
    assert res < 1e-8


def test_criterion_7_form_factor_axioms():
    """S=1 family: FD1-FD3 < 1e-9, FD4 relative < 1e-6, boundary < 1e-8; < 5 min."""
    t0 = time.monotonic()
    g = TestFunction("gaussian", width=(0.25, 0.25))
    family = builtin_family("ising-fermion-g", {"g": g})
    fw = verify_fw(family, k_max=3, seed=0, tol=1e-9)
    assert fw.passed, fw.as_text()
    fd = verify_fd(family, k_max=3, seed=0, tol=1e-9, residue_tol=1e-6)
    assert fd.passed, fd.as_text()
    grid = RapidityGrid(-1.5, 1.5, 8, 1.0)
    space = FockSpace(grid, family.S, n_max=3)
    orders = [(m, n) for m in range(3) for n in range(3) if m + n <= 2]
    A = operator_from_coefficients(
        space, boundary_coefficients(space, family, orders)
    )
    for (m, n) in orders:
        assert boundary_match(space, family, A, m, n) < 1e-8, (m, n)
    assert time.monotonic() - t0 < 300.0


def test_criterion_8_car_disorder_suite():
    """All CAR/disorder identities < 1e-12 with exact dimensions; < 30 s."""
    t0 = time.monotonic()
    for nl, nr in ((1, 1), (2, 2)):
        out = disorder_suite(nl, nr, seed=0, n_lemma_matrices=0)
        assert out["dims_match"], out
        for key, val in out["residuals"].items():
            if key == "sin_approximant":
                continue
            assert val < 1e-12, (nl, nr, key, val)
    # Lemma bounds on 100 random matrices
    rng = np.random.default_rng(0)
    for _ in range(100):
        T = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        for eps in (0.2, 0.5, 1.0, 2.0, 5.0):
            slack_norm, slack_vec = sin_approximant_bounds(T, eps)
            assert slack_norm <= 0.0 and slack_vec <= 0.0
    assert time.monotonic() - t0 < 30.0


def test_criterion_9_deterministic_reports(tmp_path):
    """all-acceptance twice with the same seed is byte-identical."""
    cfg = tmp_path / "light.toml"
    cfg.write_text(
        "\n".join(
            [
                '["check-smatrix"]', "n_samples = 40",
                '["zf-verify"]', "n_points = 8",
                'families = ["sinh_factor"]',
                '["wedge-locality"]', "n_points = 12",
                "separations = [0.0, 8.0]",
                "[scatter]", 's_list = ["sinh:0.7853981633974483"]',
                "[scatter.element]", "n_points = 16",
                "[scatter.phase]", "n_points = 16",
                "[scatter.pfg]", "n_points = 10",
                '["ff-verify"]', "n_samples = 10",
                '["ff-verify".boundary]', "n_points = 4",
                '["car-disorder"]', "sizes = [[1, 1]]",
                "n_lemma_matrices = 5",
            ]
        )
    )
    reports = []
    for tag in ("a", "b"):
        out = tmp_path / f"{tag}.json"
        r = subprocess.run(
            [sys.executable, "-m", "zfqft.cli", "all-acceptance",
             "--config", str(cfg), "--seed", "11", "--json", str(out), "--quiet"],
            capture_output=True, text=True,
        )
        assert r.returncode in (0, 1), r.stderr
        reports.append(out.read_bytes())
    assert reports[0] == reports[1]
    doc = json.loads(reports[0])
    assert doc["schema"] == 1 and doc["seed"] == 11
