"""Wedge-local fields on the truncated S-symmetric Fock space.

The left field phi(f) = z+(f~ o p) + z(f~ o (-p)) is built from the mass-shell
restrictions of a spacetime test function; the right field phi'(f) is its
conjugate by the reflection J, and the twisted right field is
hat-phi(f) = Z phi'(f) Z* = i Gamma phi'(f).  For S = -1 the Majorana
components psi_pm are available.  Locality is probed numerically through
graded commutator norms as a function of spatial separation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad

from .fockspace import FockOperator, FockSpace, RapidityGrid

DEFAULT_TAIL = 1e-8


class GradeMismatchError(ValueError):
    """Graded commutator requested for an operator without odd grade."""


class SupportViolationError(ValueError):
    """Test function supports never become wedge-separated."""


class WrongScatteringError(ValueError):
    """Majorana components exist only for the constant S = -1."""


def _bump_profile_ft(q) -> complex:
    """Fourier transform of exp(-1/(1-u^2)) on |u|<1, at frequency q.

    Complex frequencies are allowed (the compact support makes the
    transform entire); the cosine kernel is split into real and
    imaginary parts for the quadrature.
    """
    q = complex(q)

    def integrand(u, part):
        w = cmath.cos(q * u) * math.exp(-1.0 / (1.0 - u * u))
        return w.real if part == 0 else w.imag

    kw = dict(epsabs=1e-13, epsrel=1e-12, limit=200)
    re, _ = quad(integrand, 0.0, 1.0, args=(0,), **kw)
    if q.imag == 0.0:
        return 2.0 * re
    im, _ = quad(integrand, 0.0, 1.0, args=(1,), **kw)
    return 2.0 * (re + 1j * im)


@dataclass(frozen=True)
class TestFunction:
    """Real spacetime smearing function with a known Fourier transform.

    The transform convention is f~(p) = (2 pi)^-1 int f(x) e^{i p.x} d^2 x
    with the Minkowski pairing p.x = p0 x0 - p1 x1.  kind "gaussian" has a
    closed-form transform; kind "bump" (compactly supported, product of
    mollifier profiles) is transformed by adaptive quadrature.
    """

    kind: str
    center: tuple = (0.0, 0.0)
    width: tuple = (0.3, 0.3)
    tail: float = DEFAULT_TAIL

    def __post_init__(self):
        if self.kind not in ("gaussian", "bump"):
            raise ValueError(f"unknown test function kind {self.kind!r}")
        if min(self.width) <= 0:
            raise ValueError("widths must be positive")

    def fourier(self, p0, p1) -> np.ndarray:
        p0 = np.asarray(p0)
        p1 = np.asarray(p1)
        c0, c1 = self.center
        w0, w1 = self.width
        phase = np.exp(1j * (p0 * c0 - p1 * c1))
        if self.kind == "gaussian":
            envelope = w0 * w1 * np.exp(-0.5 * ((w0 * p0) ** 2 + (w1 * p1) ** 2))
            return envelope * phase
        b0 = np.vectorize(_bump_profile_ft, otypes=[complex])(w0 * p0)
        b1 = np.vectorize(_bump_profile_ft, otypes=[complex])(w1 * p1)
        return (w0 * w1 / (2.0 * np.pi)) * b0 * b1 * phase

    def support_radii(self) -> tuple:
        """Per-axis effective support radius (exact for bump kind)."""
        if self.kind == "bump":
            return tuple(self.width)
        r = math.sqrt(2.0 * math.log(1.0 / self.tail))
        return tuple(r * w for w in self.width)

    def translated(self, x) -> "TestFunction":
        return replace(self, center=(self.center[0] + x[0], self.center[1] + x[1]))

    def reflected(self) -> "TestFunction":
        """The function x -> f(-x); its transform is p -> f~(-p)."""
        return replace(self, center=(-self.center[0], -self.center[1]))

    def reality_residual(self, n_samples: int = 32, seed: int = 0) -> float:
        """Real f implies f~(-p) = conj f~(p); checked on random momenta."""
        rng = np.random.default_rng(seed)
        p = rng.normal(scale=3.0, size=(n_samples, 2))
        a = self.fourier(-p[:, 0], -p[:, 1])
        b = np.conj(self.fourier(p[:, 0], p[:, 1]))
        return float(np.max(np.abs(a - b)))

    @classmethod
    def from_config(cls, cfg: dict) -> "TestFunction":
        return cls(
            kind=cfg.get("kind", "gaussian"),
            center=tuple(float(v) for v in cfg.get("center", (0.0, 0.0))),
            width=tuple(float(v) for v in cfg.get("width", (0.3, 0.3))),
            tail=float(cfg.get("tail", DEFAULT_TAIL)),
        )


def mass_shell_restrict(grid: RapidityGrid, f: TestFunction, sign: int) -> np.ndarray:
    """Grid vector theta -> f~(sign * p(theta)), p(theta) = mu(cosh, sinh)."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return np.asarray(f.fourier(sign * grid.p0, sign * grid.p1), dtype=complex)


def phi(space: FockSpace, f: TestFunction) -> FockOperator:
    """Left field phi(f) = z+(f_plus) + z(f_minus)."""
    f_plus = mass_shell_restrict(space.grid, f, +1)
    f_minus = mass_shell_restrict(space.grid, f, -1)
    op = space.zdag(f_plus) + space.z(f_minus)
    op.grade = "odd"
    op.label = "phi"
    return op


def phi_from_vector(space: FockSpace, psi) -> FockOperator:
    """phi(psi) = z+(psi) + z(conj psi) for a bare one-particle vector."""
    psi = np.asarray(psi, dtype=complex)
    op = space.zdag(psi) + space.z(np.conj(psi))
    op.grade = "odd"
    op.label = "phi(psi)"
    return op


def phi_prime(space: FockSpace, f: TestFunction) -> FockOperator:
    """Right field phi'(f) = J phi(j.f) J with (j.f)(x) = f(-x)."""
    inner = phi(space, f.reflected())
    J = space.reflect()

    op = FockOperator(space, lambda s: J(inner(J(s))), grade="odd", label="phi'")
    return op


def phi_hat(space: FockSpace, f: TestFunction) -> FockOperator:
    """Twisted right field Z phi'(f) Z*."""
    inner = phi_prime(space, f)
    Z = space.twist()
    Zst = space._sector_scalar_op(
        lambda n: 1.0 + 0.0j if n % 2 == 0 else 1.0j, "even", "Z*"
    )
    op = Z @ inner @ Zst
    op.grade = "odd"
    op.label = "phi^"
    return op


def twist_identity_residual(space: FockSpace, f: TestFunction, domain_n_top=None) -> float:
    """Operator-norm residual of hat-phi(f) = i Gamma phi'(f)."""
    domain_n_top = (space.n_max - 1) if domain_n_top is None else domain_n_top
    lhs = phi_hat(space, f)
    rhs = 1j * (space.grading() @ phi_prime(space, f))
    return space.operator_norm(lhs - rhs, domain_n_top)


def majorana(space: FockSpace, f: TestFunction, component: int) -> FockOperator:
    """Majorana component psi_pm(f) for S = -1.

    psi_pm(f) = z+(u) + z(conj u) with
    u(theta) = exp(i pi (-2 pm 1)/4) e^{pm theta/2} f~(p(theta)).
    """
    if not space.S.is_constant_minus_one:
        raise WrongScatteringError("Majorana components require the constant S = -1")
    if component not in (1, -1):
        raise ValueError("component must be +1 or -1")
    u = majorana_amplitude(space.grid, f, component)
    op = space.zdag(u) + space.z(np.conj(u))
    op.grade = "odd"
    op.label = f"psi{'+' if component == 1 else '-'}"
    return op


def majorana_amplitude(grid: RapidityGrid, f: TestFunction, component: int) -> np.ndarray:
    theta = grid.nodes
    phase = np.exp(1j * np.pi * (-2 + component) / 4.0)
    return phase * np.exp(component * theta / 2.0) * mass_shell_restrict(grid, f, +1)


def graded_commutator_norm(
    space: FockSpace, A: FockOperator, B: FockOperator, domain_n_top=None
) -> float:
    """Spectral norm of the anticommutator {A, B} for two odd operators.

    Restricted to sectors <= N_max - 2 so that creation past the truncation
    does not contaminate the norm.
    """
    for op in (A, B):
        if op.grade != "odd":
            raise GradeMismatchError(
                f"graded commutator needs odd operators, got grade {op.grade!r}"
            )
    domain_n_top = (space.n_max - 2) if domain_n_top is None else domain_n_top
    return space.operator_norm(A @ B + B @ A, domain_n_top)


def commutator_norm(
    space: FockSpace, A: FockOperator, B: FockOperator, domain_n_top=None
) -> float:
    domain_n_top = (space.n_max - 2) if domain_n_top is None else domain_n_top
    return space.operator_norm(A @ B - B @ A, domain_n_top)


@dataclass
class LocalityReport:
    """Graded-locality decay table over spatial separations."""

    s_label: str
    rows: list = field(default_factory=list)  # (sep, anticomm_norm, comm_norm)
    mode: str = "twisted"  # twisted: phi vs phi-hat; majorana: psi vs phi'

    @property
    def decay_factor(self) -> float:
        if len(self.rows) < 2:
            return 1.0
        key = 1 if self.mode == "twisted" else 2
        top, bottom = self.rows[0][key], self.rows[-1][key]
        return float("inf") if bottom == 0 else top / bottom

    @property
    def strictly_decreasing(self) -> bool:
        key = 1 if self.mode == "twisted" else 2
        vals = [r[key] for r in self.rows]
        return all(a > b for a, b in zip(vals, vals[1:]))

    @property
    def floor(self) -> float:
        key = 1 if self.mode == "twisted" else 2
        return min(r[key] for r in self.rows) if self.rows else 0.0


def _check_wedge_separable(f_left, g_right, separations):
    """The declared supports must become wedge-separated at max separation."""
    rf = f_left.support_radii()
    rg = g_right.support_radii()
    d = max(separations)
    left_edge = f_left.center[1] + max(rf)
    right_edge = g_right.center[1] + d - max(rg)
    if right_edge <= left_edge:
        raise SupportViolationError(
            "supports never wedge-separated: right support edge "
            f"{right_edge:.3g} does not clear left edge {left_edge:.3g}"
        )


def wedge_locality_report(
    space: FockSpace,
    f_left: TestFunction,
    g_right: TestFunction,
    separations,
    mode: str = "twisted",
    majorana_component: int = 1,
) -> LocalityReport:
    """Norms of {phi(f), hat-phi(g_d)} and [phi(f), hat-phi(g_d)] per separation d.

    The right function is translated by (0, d) along the spatial axis.  In
    "majorana" mode (S = -1 only) the left operator is psi_pm(f) and the
    right operator phi'(g_d); there the plain commutator is the one that
    decays.
    """
    separations = sorted(float(d) for d in separations)
    _check_wedge_separable(f_left, g_right, separations)
    if mode == "majorana":
        A = majorana(space, f_left, majorana_component)
    elif mode == "twisted":
        A = phi(space, f_left)
    else:
        raise ValueError(f"unknown locality mode {mode!r}")
    report = LocalityReport(s_label=space.S.label(), mode=mode)
    for d in separations:
        g_d = g_right.translated((0.0, d))
        B = phi_prime(space, g_d) if mode == "majorana" else phi_hat(space, g_d)
        B.grade = "odd"
        anti = graded_commutator_norm(space, A, B)
        comm = commutator_norm(space, A, B)
        report.rows.append((d, anti, comm))
    return report
