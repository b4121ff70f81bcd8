"""Haag-Ruelle style scattering on the truncated S-symmetric Fock space.

Asymptotic states are built through the polarization-free-generator shortcut:
for a mass-shell filter chi whose plateau covers the rapidity support of a
packet psi, the averaged field phi(psi)^chi acts as (2 pi)^2 z+(psi), so
multi-particle out states are plain products of creators.  Two-particle
S-matrix elements are compared against the factorized analytic kernel with
two-particle amplitude -S.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .fockspace import FockOperator, FockSpace, FockState, RapidityGrid
from .smatrix import ScatteringFunction

TWO_PI_SQ = (2.0 * np.pi) ** 2


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class OrderingError(ValueError):
    """Packet rapidity supports are not strictly ordered."""


class PlateauCoverageError(ValueError):
    """Chi plateau does not cover the packet's rapidity support."""


@dataclass(frozen=True)
class WavePacket:
    """One-dimensional momentum-space packet on the mass-mu shell.

    The profile is a Gaussian f~(k) = exp(-(k-k0)^2 w^2 / 2) e^{-i k x0};
    the rapidity support is the interval where |f~| exceeds tail times the
    peak, mapped through k = mu sinh(theta).
    """

    k_center: float
    k_width: float = 1.0  # w: larger w means narrower in momentum
    x0: float = 0.0
    mass: float = 1.0
    tail: float = 1e-8

    def profile(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        return np.exp(-0.5 * (self.k_width * (k - self.k_center)) ** 2) * np.exp(
            -1j * k * self.x0
        )

    def rapidity_support(self) -> tuple:
        half = math.sqrt(2.0 * math.log(1.0 / self.tail)) / self.k_width
        lo, hi = self.k_center - half, self.k_center + half
        return (math.asinh(lo / self.mass), math.asinh(hi / self.mass))

    def one_particle_vector(self, grid: RapidityGrid) -> np.ndarray:
        """Rapidity wavefunction: unitary change of variables from L2(dk)."""
        k = grid.mass * np.sinh(grid.nodes)
        jac = np.sqrt(grid.mass * np.cosh(grid.nodes))
        return np.asarray(self.profile(k), dtype=complex) * jac

    @classmethod
    def from_config(cls, cfg: dict) -> "WavePacket":
        return cls(
            k_center=float(cfg["k_center"]),
            k_width=float(cfg.get("k_width", 1.0)),
            x0=float(cfg.get("x0", 0.0)),
            mass=float(cfg.get("mass", 1.0)),
            tail=float(cfg.get("tail", 1e-8)),
        )


def packet_evolve(f: WavePacket, tau: float, x: float, tol: float = 1e-10) -> complex:
    """Free Klein-Gordon evolution f(tau, x) = (2 pi)^-1 int f~(k) e^{ixk - i tau omega}."""
    mu = f.mass
    half = math.sqrt(2.0 * math.log(1.0 / f.tail)) / f.k_width
    lo, hi = f.k_center - half, f.k_center + half

    def integrand(k, part):
        val = f.profile(k) * np.exp(1j * (x * k - tau * math.hypot(k, mu)))
        return val.real if part == 0 else val.imag

    out = 0.0 + 0.0j
    for part, unit in ((0, 1.0), (1, 1.0j)):
        val, err = quad(integrand, lo, hi, args=(part,), epsabs=tol / 10, limit=400)
        if err > tol:
            raise QuadratureError(f"packet quadrature error {err:.2e} exceeds {tol:.1e}")
        out += unit * val
    return out / (2.0 * np.pi)


def _smoothstep(u: np.ndarray) -> np.ndarray:
    """C^2 quintic ramp: 0 at u<=0, 1 at u>=1."""
    u = np.clip(u, 0.0, 1.0)
    return u**3 * (10.0 - 15.0 * u + 6.0 * u * u)


@dataclass(frozen=True)
class ChiFilter:
    """Mass-shell momentum filter chi~ for the averaging A^chi.

    chi~(q) is nonzero only for future-pointing timelike q; there it is the
    product of a window in the invariant mass |sqrt(q.q) - mu| (value 1 up
    to shell_plateau, 0 beyond shell_width) and a window in the rapidity
    artanh(q1/q0) (value 1 on [rap_lo, rap_hi], 0 outside the transition
    band of width rap_ramp).  Both transitions are C^2 smoothsteps.
    """

    mass: float = 1.0
    shell_plateau: float = 0.05
    shell_width: float = 0.3
    rap_lo: float = -2.0
    rap_hi: float = 2.0
    rap_ramp: float = 0.5

    def __post_init__(self):
        if not 0 < self.shell_plateau < self.shell_width:
            raise ValueError("need 0 < shell_plateau < shell_width")
        if self.rap_hi <= self.rap_lo or self.rap_ramp <= 0:
            raise ValueError("invalid rapidity window")

    def tilde(self, q0, q1) -> np.ndarray:
        q0 = np.asarray(q0, dtype=float)
        q1 = np.asarray(q1, dtype=float)
        q2 = q0 * q0 - q1 * q1
        future = (q0 > 0) & (q2 > 0)
        m_eff = np.sqrt(np.where(future, q2, 1.0))
        dm = np.abs(m_eff - self.mass)
        shell = 1.0 - _smoothstep(
            (dm - self.shell_plateau) / (self.shell_width - self.shell_plateau)
        )
        rap = np.arctanh(np.where(future, np.clip(q1 / np.maximum(q0, 1e-300), -1 + 1e-12, 1 - 1e-12), 0.0))
        ramp_lo = _smoothstep((rap - (self.rap_lo - self.rap_ramp)) / self.rap_ramp)
        ramp_hi = 1.0 - _smoothstep((rap - self.rap_hi) / self.rap_ramp)
        return np.where(future, shell * ramp_lo * ramp_hi, 0.0)

    def covers(self, lo: float, hi: float) -> bool:
        return self.rap_lo <= lo and hi <= self.rap_hi

    @classmethod
    def from_config(cls, cfg: dict) -> "ChiFilter":
        return cls(
            mass=float(cfg.get("mass", 1.0)),
            shell_plateau=float(cfg.get("shell_plateau", 0.05)),
            shell_width=float(cfg.get("shell_width", 0.3)),
            rap_lo=float(cfg.get("rap_lo", -2.0)),
            rap_hi=float(cfg.get("rap_hi", 2.0)),
            rap_ramp=float(cfg.get("rap_ramp", 0.5)),
        )


def _sector_momenta(space: FockSpace, n: int) -> tuple:
    """Total (P0, P1) tensors of the rank-n node basis."""
    key = ("mom", n)
    cache = space.__dict__.setdefault("_momentum_cache", {})
    if key not in cache:
        M = space.grid.n_points
        p0 = np.zeros((M,) * n)
        p1 = np.zeros((M,) * n)
        for ax in range(n):
            shape = [1] * n
            shape[ax] = M
            p0 = p0 + space.grid.p0.reshape(shape)
            p1 = p1 + space.grid.p1.reshape(shape)
        cache[key] = (p0, p1)
    return cache[key]


def chi_average(space: FockSpace, A: FockOperator, chi: ChiFilter) -> FockOperator:
    """A^chi: matrix elements multiplied by (2 pi)^2 chi~(P_out - P_in).

    Exact in the node basis since translations are diagonal there.  The
    lazy application decomposes the input state into node-basis components
    (each has a definite total momentum), so it is efficient precisely on
    sparse states such as enumeration basis vectors.
    """

    def ap(state: FockState) -> FockState:
        acc: dict = {}
        for n, t in state.sectors.items():
            p0_in, p1_in = _sector_momenta(space, n) if n else (0.0, 0.0)
            flat = t.reshape(-1)
            nz = np.nonzero(flat)[0]
            for pos in nz:
                idx = np.unravel_index(pos, t.shape) if n else ()
                unit = np.zeros_like(t)
                unit[idx] = flat[pos]
                out = A(FockState({n: unit}))
                q0_in = p0_in[idx] if n else 0.0
                q1_in = p1_in[idx] if n else 0.0
                for m, ot in out.sectors.items():
                    p0_out, p1_out = _sector_momenta(space, m) if m else (0.0, 0.0)
                    w = TWO_PI_SQ * chi.tilde(p0_out - q0_in, p1_out - q1_in)
                    acc[m] = acc.get(m, 0) + w * ot
        return FockState(acc)

    return FockOperator(space, ap, grade=A.grade, label=f"({A.label})^chi")


def detected_rapidity_support(space: FockSpace, psi, tail: float = 1e-8) -> tuple:
    psi = np.asarray(psi)
    mag = np.abs(psi)
    keep = np.nonzero(mag > tail * mag.max())[0]
    theta = space.grid.nodes
    return (float(theta[keep[0]]), float(theta[keep[-1]]))


def pfg_creator(space: FockSpace, psi, chi: ChiFilter) -> FockOperator:
    """phi(psi)^chi, which equals (2 pi)^2 z+(psi) for a compliant chi."""
    from .fields import phi_from_vector

    lo, hi = detected_rapidity_support(space, psi)
    if not chi.covers(lo, hi):
        raise PlateauCoverageError(
            f"chi plateau [{chi.rap_lo}, {chi.rap_hi}] does not cover "
            f"detected rapidity support [{lo:.3f}, {hi:.3f}]"
        )
    return chi_average(space, phi_from_vector(space, psi), chi)


def pfg_residual(space: FockSpace, psi, chi: ChiFilter, domain_n_top=None) -> float:
    """Frobenius-norm residual of phi(psi)^chi = (2 pi)^2 z+(psi)."""
    domain_n_top = (space.n_max - 1) if domain_n_top is None else domain_n_top
    diff = pfg_creator(space, psi, chi) - TWO_PI_SQ * space.zdag(np.asarray(psi, dtype=complex))
    return space.operator_norm(diff, domain_n_top)


def time_smeared_pfg(
    space: FockSpace, psi, packet: WavePacket, chi: ChiFilter, tau: float
) -> FockOperator:
    """The Haag-Ruelle operator (phi(psi)^chi)_tau(f).

    Smearing A^chi with the evolved packet f(tau, .) multiplies each matrix
    element additionally by e^{i q0 tau} f~(q1) e^{-i tau omega(q1)}, which
    is tau-independent exactly on the mass shell q = p(theta).
    """
    base = pfg_creator(space, psi, chi)
    mu = packet.mass

    def ap(state: FockState) -> FockState:
        acc: dict = {}
        for n, t in state.sectors.items():
            p0_in, p1_in = _sector_momenta(space, n) if n else (0.0, 0.0)
            flat = t.reshape(-1)
            for pos in np.nonzero(flat)[0]:
                idx = np.unravel_index(pos, t.shape) if n else ()
                unit = np.zeros_like(t)
                unit[idx] = flat[pos]
                out = base(FockState({n: unit}))
                q0_in = p0_in[idx] if n else 0.0
                q1_in = p1_in[idx] if n else 0.0
                for m, ot in out.sectors.items():
                    p0_out, p1_out = _sector_momenta(space, m) if m else (0.0, 0.0)
                    q0 = p0_out - q0_in
                    q1 = p1_out - q1_in
                    omega = np.sqrt(q1 * q1 + mu * mu)
                    w = packet.profile(q1) * np.exp(1j * tau * (q0 - omega))
                    acc[m] = acc.get(m, 0) + w * ot
        return FockState(acc)

    return FockOperator(space, ap, grade=base.grade, label=f"pfg_tau({tau})")


def tau_independence_residual(
    space: FockSpace,
    psi,
    packet: WavePacket,
    chi: ChiFilter,
    taus=(1.0, 5.0, 25.0),
    domain_n_top=None,
) -> float:
    """Worst operator-norm difference of (phi(psi)^chi)_tau(f) across taus.

    The smearing phase e^{i tau (q0 - omega(q1))} is 1 exactly on the mass
    shell, so the Haag-Ruelle operator is tau-independent up to rounding.
    """
    domain_n_top = (space.n_max - 1) if domain_n_top is None else domain_n_top
    ops = [time_smeared_pfg(space, psi, packet, chi, t) for t in taus]
    worst = 0.0
    for a, b in zip(ops, ops[1:]):
        worst = max(worst, space.operator_norm(a - b, domain_n_top))
    return worst


# -- graded symmetrization --------------------------------------------------


@dataclass
class GradedSymmetrizer:
    """The representation pi_Gamma of S_n on an n-fold tensor power.

    grades[i] is +1 (even) or -1 (odd) for the i-th tensor factor.
    pi_Gamma(sigma) carries the sign prod_{i<j, sigma(i)>sigma(j)}
    (-1)^{(1-g_sigma(i))(1-g_sigma(j))/4}; for all factors odd this is
    sign(sigma) and P_Gamma is the antisymmetrizer.
    """

    n: int
    grades: tuple

    def __post_init__(self):
        if self.n > 6:
            raise ValueError("graded symmetrizer limited to n <= 6")
        if len(self.grades) != self.n or any(g not in (1, -1) for g in self.grades):
            raise ValueError("grades must be n entries of +-1")

    def sign(self, sigma) -> float:
        s = 1.0
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if sigma[i] > sigma[j]:
                    gi, gj = self.grades[sigma[i]], self.grades[sigma[j]]
                    s *= (-1.0) ** ((1 - gi) * (1 - gj) // 4)
        return s

    def permute(self, tensor: np.ndarray, sigma) -> np.ndarray:
        """pi_Gamma(sigma) applied to a rank-n tensor."""
        return self.sign(sigma) * np.transpose(tensor, axes=np.argsort(sigma))

    def project(self, tensor: np.ndarray) -> np.ndarray:
        """P_Gamma = (1/n!) sum_sigma pi_Gamma(sigma)."""
        import itertools

        acc = np.zeros_like(np.asarray(tensor, dtype=complex))
        for sigma in itertools.permutations(range(self.n)):
            acc += self.permute(tensor, sigma)
        return acc / math.factorial(self.n)


def graded_symmetrizer(n: int, grades=None) -> GradedSymmetrizer:
    grades = tuple([-1] * n if grades is None else grades)
    return GradedSymmetrizer(n=n, grades=grades)


# -- asymptotic states and S-matrix elements --------------------------------


def _check_ordering(supports) -> None:
    for (lo1, hi1), (lo2, hi2) in zip(supports, supports[1:]):
        if hi1 >= lo2:
            raise OrderingError(
                f"rapidity supports not strictly ordered: [{lo1:.3f},{hi1:.3f}] "
                f"precedes [{lo2:.3f},{hi2:.3f}]"
            )


def w_out(space: FockSpace, vectors, chi: ChiFilter, use_pfg: bool = True) -> FockState:
    """Out-state z+(psi_1)...z+(psi_k) Omega for ordered disjoint packets.

    Each creator is realized as phi(psi)^chi / (2 pi)^2 when use_pfg is set
    (the literal construction), or directly as z+(psi).
    """
    vectors = [np.asarray(v, dtype=complex) for v in vectors]
    if len(vectors) > space.n_max:
        raise ValueError("more packets than the truncation supports")
    _check_ordering([detected_rapidity_support(space, v) for v in vectors])
    state = space.vacuum()
    for v in reversed(vectors):
        if use_pfg:
            state = pfg_creator(space, v, chi)(state) * (1.0 / TWO_PI_SQ)
        else:
            state = space.create(v, state)
    return state


def s_matrix_element(
    space: FockSpace, out_vectors, in_vectors, chi: ChiFilter, use_pfg: bool = True
) -> complex:
    """<P_Gamma psi_1 x...x psi_k, S P_Gamma eta_n x...x eta_1> via Eq-style
    PFG matrix elements:

        (k! n!)^{-1/2} (2 pi)^{-2(k+n)}
        <prod phi^chi(psi_i) Omega, U(j) prod phi^chi(U(j) eta_i) Omega>.

    Both packet lists must be strictly ordered in rapidity support.
    """
    k, n = len(out_vectors), len(in_vectors)
    out_state = w_out(space, out_vectors, chi, use_pfg=use_pfg)
    uj = space.uj()
    reflected = [uj(space.one_particle(np.asarray(v, dtype=complex))).sectors[1] for v in in_vectors]
    in_product = space.vacuum()
    for v in reversed(reflected):
        if use_pfg:
            in_product = pfg_creator(space, v, chi)(in_product) * (1.0 / TWO_PI_SQ)
        else:
            in_product = space.create(v, in_product)
    in_state = uj(in_product)
    raw = space.inner(out_state, in_state)
    return raw / math.sqrt(math.factorial(k) * math.factorial(n))


def analytic_kernel(S: ScatteringFunction, theta) -> complex:
    """prod_{k<m} (-S(|theta_k - theta_m|)): the factorized amplitude."""
    theta = np.asarray(theta, dtype=float)
    out = 1.0 + 0.0j
    for a in range(len(theta)):
        for b in range(a + 1, len(theta)):
            out *= -complex(S(abs(theta[a] - theta[b])))
    return out


def analytic_two_particle_element(space: FockSpace, out_vectors, in_vectors) -> complex:
    """Quadrature oracle: <psi_1 x psi_2, (P_Gamma S P_Gamma)_2 (eta_2 x eta_1)>.

    The symmetrized delta pairing is realized against the packet
    wavefunctions; the amplitude is -S(|theta_1 - theta_2|).
    """
    (p1, p2), (e1, e2) = out_vectors, in_vectors
    d = space.grid.spacing
    theta = space.grid.nodes
    amp = -np.asarray(space.S(np.abs(theta[:, None] - theta[None, :])))
    eta_sym = 0.5 * (
        np.multiply.outer(np.asarray(e2), np.asarray(e1))
        + np.multiply.outer(np.asarray(e1), np.asarray(e2))
    )
    integrand = np.conj(np.multiply.outer(np.asarray(p1), np.asarray(p2))) * amp * eta_sym
    return complex(d * d * np.sum(integrand))


def two_particle_phase(space: FockSpace, out_vectors, in_vectors, chi: ChiFilter,
                       use_pfg: bool = True) -> complex:
    """Extracted two-particle amplitude: S-element over the S-free pairing.

    For narrow packets centered at rapidities t1 < t2 this approximates the
    constant -S(t2 - t1).
    """
    elem = s_matrix_element(space, out_vectors, in_vectors, chi, use_pfg=use_pfg)
    (p1, p2), (e1, e2) = out_vectors, in_vectors
    d = space.grid.spacing
    pairing = 0.5 * complex(
        d * d
        * np.sum(np.conj(np.multiply.outer(np.asarray(p1), np.asarray(p2)))
                 * np.multiply.outer(np.asarray(e1), np.asarray(e2)))
    )
    return elem / pairing
