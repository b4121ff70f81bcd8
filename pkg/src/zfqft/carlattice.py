"""Exact finite CAR-algebra model of gradings, twists and disorder operators.

A Jordan-Wigner chain of n_left + n_right fermionic modes realizes the
graded left/right algebra structure exactly: the left modes stand in for
the algebra localized in the left wedge, the right modes for the double
cone / right wedge, and the disorder operator V_L is the partial grading
over the left modes.  Every identity (graded permutation formula,
conditional expectation, beta automorphism, fixed-point nets, the
sin-function approximant) is checked with dense matrices, so residuals
are pure floating-point roundoff.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
LOWER = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |1> -> |0>
IDENT2 = np.eye(2, dtype=complex)


class GradeSideError(ValueError):
    """Element violates a grade or mode-support precondition."""


class DecompositionError(ValueError):
    """Element lies outside the span F + F V of the extended algebra."""


def _kron_chain(mats) -> np.ndarray:
    return reduce(np.kron, mats)


def opnorm(A: np.ndarray) -> float:
    return float(np.linalg.norm(A, 2))


@dataclass
class CarElement:
    """Dense matrix with grade and mode-support tags."""

    matrix: np.ndarray
    grade: str = "mixed"  # even | odd | mixed
    modes: tuple = ()  # supporting mode indices; () means unspecified/global

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)


class CarSystem:
    """CAR algebra over n_left + n_right modes in a Jordan-Wigner chain.

    Mode operators a_i carry the sign string over all earlier sites, with
    the left modes occupying the contiguous prefix 0 .. n_left-1, so the
    partial grading over the left block is local-side-correct.
    """

    def __init__(self, n_left: int, n_right: int):
        if n_left < 0 or n_right < 0 or n_left + n_right == 0:
            raise ValueError("need at least one mode")
        self.n_left = n_left
        self.n_right = n_right
        self.n_modes = n_left + n_right
        self.dim = 2**self.n_modes
        self.a = [self._mode_op(i) for i in range(self.n_modes)]
        self.adag = [m.conj().T for m in self.a]
        self.gamma = self.partial_grading(range(self.n_modes))
        self.identity = np.eye(self.dim, dtype=complex)
        # Z(1 + i Gamma)/sqrt(2) implements the twist A -> A_+ + i Gamma A_-
        self.twist = (self.identity + 1j * self.gamma) / math.sqrt(2.0)
        self.vacuum = np.zeros(self.dim, dtype=complex)
        self.vacuum[0] = 1.0

    def _mode_op(self, i: int) -> np.ndarray:
        mats = [SIGMA_Z] * i + [LOWER] + [IDENT2] * (self.n_modes - i - 1)
        return _kron_chain(mats)

    def partial_grading(self, modes) -> np.ndarray:
        """Product of (1 - 2 a_i+ a_i) over the given modes."""
        mats = [IDENT2] * self.n_modes
        for i in modes:
            mats[i] = SIGMA_Z
        return _kron_chain(mats)

    @property
    def left_modes(self):
        return tuple(range(self.n_left))

    @property
    def right_modes(self):
        return tuple(range(self.n_left, self.n_modes))

    def number_op(self, i: int) -> np.ndarray:
        return self.adag[i] @ self.a[i]

    def grade_of(self, A: np.ndarray, tol: float = 1e-12) -> str:
        conj = self.gamma @ A @ self.gamma
        if opnorm(conj - A) < tol * max(opnorm(A), 1.0):
            return "even"
        if opnorm(conj + A) < tol * max(opnorm(A), 1.0):
            return "odd"
        return "mixed"

    def element(self, A: np.ndarray, modes=()) -> CarElement:
        return CarElement(np.asarray(A, dtype=complex), self.grade_of(A), tuple(modes))

    def algebra_basis(self, modes) -> list:
        """Linear basis a+_{T1} a_{T2} (subset products) of the mode algebra."""
        modes = tuple(modes)
        out = []
        for r1 in range(len(modes) + 1):
            for t1 in itertools.combinations(modes, r1):
                for r2 in range(len(modes) + 1):
                    for t2 in itertools.combinations(modes, r2):
                        B = self.identity
                        for i in t1:
                            B = B @ self.adag[i]
                        for i in t2:
                            B = B @ self.a[i]
                        out.append(self.element(B, modes))
        return out

    def car_residual(self) -> float:
        """Worst-case deviation from the canonical anticommutation relations."""
        worst = 0.0
        for i in range(self.n_modes):
            for j in range(self.n_modes):
                acc1 = self.a[i] @ self.adag[j] + self.adag[j] @ self.a[i]
                target = self.identity if i == j else 0.0
                worst = max(worst, opnorm(acc1 - target * np.eye(self.dim)))
                acc2 = self.a[i] @ self.a[j] + self.a[j] @ self.a[i]
                worst = max(worst, opnorm(acc2))
        return worst

    def grading_residual(self) -> float:
        """Gamma a_i Gamma = -a_i and Gamma Omega = Omega, exactly."""
        worst = max(
            opnorm(self.gamma @ m @ self.gamma + m) for m in self.a
        )
        return max(worst, float(np.linalg.norm(self.gamma @ self.vacuum - self.vacuum)))


# -- grading algebra --------------------------------------------------------


def graded_split(sys: CarSystem, A: CarElement) -> tuple:
    """A = A_+ + A_- with A_pm = (A -+/+ Gamma A Gamma)/2."""
    conj = sys.gamma @ A.matrix @ sys.gamma
    plus = CarElement((A.matrix + conj) / 2.0, "even", A.modes)
    minus = CarElement((A.matrix - conj) / 2.0, "odd", A.modes)
    return plus, minus


def twist_conjugate(sys: CarSystem, A: CarElement) -> CarElement:
    """A^t = Z A Z*; equals A_+ + i Gamma A_-."""
    out = sys.twist @ A.matrix @ sys.twist.conj().T
    return CarElement(out, sys.grade_of(out), A.modes)


def twist_identity_residual(sys: CarSystem, A: CarElement) -> float:
    plus, minus = graded_split(sys, A)
    direct = twist_conjugate(sys, A).matrix
    return opnorm(direct - (plus.matrix + 1j * sys.gamma @ minus.matrix))


def verify_graded_permute(sys: CarSystem, elements: list, sigma) -> float:
    """Residual of the graded permutation formula.

    For A_j supported on pairwise disjoint mode sets (hence in mutual
    twisted commutants) with pure grade,
    A_sigma(1) ... A_sigma(n) equals the sum over signs s_j = +-1 of
    prod_{j<k, sigma(j)>sigma(k)} (-1)^{(1-s_j)(1-s_k)/4} applied to the
    product of graded components alpha_{s_j}(A_j) in natural order.
    """
    n = len(elements)
    sigma = tuple(sigma)
    if sorted(sigma) != list(range(n)):
        raise ValueError("sigma must be a permutation of range(n)")
    for j, el in enumerate(elements):
        if el.grade == "mixed":
            raise GradeSideError(f"element {j} must have pure grade")
        if not el.modes:
            raise GradeSideError(f"element {j} needs a declared mode support")
    for j, k in itertools.combinations(range(n), 2):
        if set(elements[j].modes) & set(elements[k].modes):
            raise GradeSideError(
                f"elements {j} and {k} overlap in modes; "
                "the permutation formula needs twisted commutants"
            )
    lhs = sys.identity
    for j in sigma:
        lhs = lhs @ elements[j].matrix
    parts = [graded_split(sys, el) for el in elements]
    rhs = np.zeros_like(lhs)
    for signs in itertools.product((1, -1), repeat=n):
        phase = 1.0
        for j in range(n):
            for k in range(j + 1, n):
                if sigma.index(j) > sigma.index(k):
                    phase *= (-1.0) ** (((1 - signs[j]) * (1 - signs[k])) // 4)
        term = sys.identity
        for j in range(n):
            term = term @ (parts[j][0].matrix if signs[j] == 1 else parts[j][1].matrix)
        rhs = rhs + phase * term
    return opnorm(lhs - rhs)


# -- disorder operators -----------------------------------------------------


def disorder_left(sys: CarSystem) -> CarElement:
    """V_L: product of (1 - 2 a_i+ a_i) over the left modes.

    Unitary, even; conjugation acts as the grading on the left algebra
    and as the identity on the right algebra.
    """
    return CarElement(sys.partial_grading(sys.left_modes), "even", sys.left_modes)


def disorder_right(sys: CarSystem) -> CarElement:
    """V_R = Gamma V_L: grading over the right modes."""
    return CarElement(sys.partial_grading(sys.right_modes), "even", sys.right_modes)


def disorder_conjugation_residual(sys: CarSystem) -> float:
    """Worst residual of the defining conjugation identities on generators."""
    VL = disorder_left(sys).matrix
    VR = disorder_right(sys).matrix
    worst = opnorm(VL @ VL.conj().T - sys.identity)
    worst = max(worst, opnorm(VL @ sys.gamma - sys.gamma @ VL))
    worst = max(worst, opnorm(VR - sys.gamma @ VL))
    for i in range(sys.n_modes):
        g = sys.a[i]
        left = i < sys.n_left
        tL = sys.gamma @ g @ sys.gamma if left else g
        tR = g if left else sys.gamma @ g @ sys.gamma
        worst = max(worst, opnorm(VL @ g @ VL.conj().T - tL))
        worst = max(worst, opnorm(VR @ g @ VR.conj().T - tR))
    return worst


def in_span_residual(A: np.ndarray, basis: list) -> float:
    """Distance of A from the linear span of the basis matrices."""
    X = np.column_stack([b.matrix.ravel() for b in basis])
    y = A.ravel()
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    return float(np.linalg.norm(X @ coef - y))


def disorder_uniqueness_residual(sys: CarSystem, u_even: np.ndarray) -> float:
    """Lemma-style uniqueness: two disorder operators differ by an even
    local unitary, i.e. V (u V)^* lies in the even local algebra."""
    if sys.grade_of(u_even) != "even":
        raise GradeSideError("the perturbing unitary must be even")
    V = disorder_left(sys).matrix
    Vhat = u_even @ V
    prod = V @ Vhat.conj().T
    basis = [b for b in sys.algebra_basis(sys.right_modes) if b.grade == "even"]
    return in_span_residual(prod, basis)


def conditional_expectation(sys: CarSystem, A: CarElement) -> CarElement:
    """m(A) = (A + V_L A V_L* + V_R A V_R* + V_L V_R A V_R* V_L*)/4."""
    VL = disorder_left(sys).matrix
    VR = disorder_right(sys).matrix
    M = A.matrix
    out = (
        M
        + VL @ M @ VL.conj().T
        + VR @ M @ VR.conj().T
        + VL @ VR @ M @ VR.conj().T @ VL.conj().T
    ) / 4.0
    return CarElement(out, sys.grade_of(out), A.modes)


def random_even_unitary(sys: CarSystem, modes, rng) -> np.ndarray:
    """exp(iH) for a random even hermitian H in the mode algebra."""
    basis = [b for b in sys.algebra_basis(modes) if b.grade == "even"]
    H = sum(rng.normal() * b.matrix for b in basis)
    H = (H + H.conj().T) / 2.0
    w, v = np.linalg.eigh(H)
    return (v * np.exp(1j * w)) @ v.conj().T


# -- beta automorphism and fixed-point nets ---------------------------------


def beta_automorphism(
    sys: CarSystem, A: CarElement, V: CarElement | None = None, tol: float = 1e-9
) -> CarElement:
    """beta(A) = A_1 - A_2 V for the unique split A = A_1 + A_2 V.

    The decomposition is solved in the flattened matrix basis of the
    localized algebra F (the right-mode algebra) and F V; elements
    outside that span raise DecompositionError.
    """
    V = disorder_left(sys) if V is None else V
    fbasis = sys.algebra_basis(sys.right_modes)
    cols = [b.matrix.ravel() for b in fbasis]
    cols += [(b.matrix @ V.matrix).ravel() for b in fbasis]
    X = np.column_stack(cols)
    y = A.matrix.ravel()
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    if np.linalg.norm(X @ coef - y) > tol * max(1.0, np.linalg.norm(y)):
        raise DecompositionError("element is not in F + F V")
    half = len(fbasis)
    A1 = sum(c * b.matrix for c, b in zip(coef[:half], fbasis))
    A2 = sum(c * b.matrix for c, b in zip(coef[half:], fbasis))
    out = A1 - A2 @ V.matrix
    return CarElement(out, sys.grade_of(out), A.modes)


@dataclass
class FourNetsReport:
    """Dimensions and residuals of the four fixed-point subspaces."""

    dims: dict = field(default_factory=dict)
    expected_dims: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    tol: float = 1e-12

    @property
    def passed(self) -> bool:
        return self.dims == self.expected_dims and all(
            r < self.tol for r in self.residuals.values()
        )

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0


def _span_dim(mats, tol=1e-10) -> int:
    X = np.column_stack([m.ravel() for m in mats])
    return int(np.linalg.matrix_rank(X, tol=tol))


def _same_span_residual(mats_a, mats_b) -> float:
    """Symmetric mutual-inclusion residual of two matrix spans."""

    def one_way(src, dst):
        X = np.column_stack([m.ravel() for m in dst])
        worst = 0.0
        for m in src:
            y = m.ravel()
            coef, *_ = np.linalg.lstsq(X, y, rcond=None)
            scale = max(np.linalg.norm(y), 1.0)
            worst = max(worst, float(np.linalg.norm(X @ coef - y)) / scale)
        return worst

    return max(one_way(mats_a, mats_b), one_way(mats_b, mats_a))


def fixed_point_nets(sys: CarSystem) -> FourNetsReport:
    """Fixed-point subspaces of Fhat = F v {V_L} under alpha, beta, both.

    With F the right-mode algebra and alpha = Ad Gamma, beta the sign
    flip on the V_L component: alpha-fixed = Fhat_+, beta-fixed = F,
    (alpha o beta)-fixed = F_+ + F_- V_L, both-fixed = F_+; dimensions
    and spans are verified exactly.
    """
    V = disorder_left(sys).matrix
    fbasis = sys.algebra_basis(sys.right_modes)
    f_even = [b.matrix for b in fbasis if b.grade == "even"]
    f_odd = [b.matrix for b in fbasis if b.grade == "odd"]
    f_all = [b.matrix for b in fbasis]
    fhat = f_all + [m @ V for m in f_all]

    def alpha(M):
        return sys.gamma @ M @ sys.gamma

    # beta on the split basis: identity on F, sign flip on F V
    fixed_alpha = [m for m in f_even] + [m @ V for m in f_even]
    fixed_beta = list(f_all)
    fixed_alphabeta = list(f_even) + [m @ V for m in f_odd]
    fixed_both = list(f_even)

    report = FourNetsReport()
    nr = sys.n_right
    report.expected_dims = {
        "fhat": 2 * 4**nr,
        "alpha": 4**nr,
        "beta": 4**nr,
        "alpha_beta": 4**nr,
        "both": 4**nr // 2,
    }
    report.dims = {
        "fhat": _span_dim(fhat),
        "alpha": _span_dim(fixed_alpha),
        "beta": _span_dim(fixed_beta),
        "alpha_beta": _span_dim(fixed_alphabeta),
        "both": _span_dim(fixed_both),
    }
    # brute-force fixed subspaces from the action on the fhat basis; each
    # basis element is an alpha and beta eigenvector, so membership is a
    # per-element eigenvalue test
    brute_alpha, brute_beta, brute_ab, brute_both = [], [], [], []
    for idx, M in enumerate(fhat):
        beta_sign = 1.0 if idx < len(f_all) else -1.0
        alpha_fixed = opnorm(alpha(M) - M) < 1e-12 * max(opnorm(M), 1.0)
        if alpha_fixed:
            brute_alpha.append(M)
        if beta_sign > 0:
            brute_beta.append(M)
        if opnorm(alpha(beta_sign * M) - M) < 1e-12 * max(opnorm(M), 1.0):
            brute_ab.append(M)
        if alpha_fixed and beta_sign > 0:
            brute_both.append(M)
    report.residuals = {
        "alpha": _same_span_residual(fixed_alpha, brute_alpha),
        "beta": _same_span_residual(fixed_beta, brute_beta),
        "alpha_beta": _same_span_residual(fixed_alphabeta, brute_ab),
        "both": _same_span_residual(fixed_both, brute_both),
    }
    return report


# -- full identity suite ----------------------------------------------------


def _random_element(sys: CarSystem, rng) -> CarElement:
    M = rng.normal(size=(sys.dim, sys.dim)) + 1j * rng.normal(size=(sys.dim, sys.dim))
    return sys.element(M)


def _random_hat_element(sys: CarSystem, rng, fbasis, V: CarElement) -> CarElement:
    """Random element A_1 + A_2 V of the extended algebra F + F V."""
    A1 = sum((rng.normal() + 1j * rng.normal()) * b.matrix for b in fbasis)
    A2 = sum((rng.normal() + 1j * rng.normal()) * b.matrix for b in fbasis)
    return sys.element(A1 + A2 @ V.matrix)


def disorder_suite(
    n_left: int, n_right: int, seed: int = 0, n_lemma_matrices: int = 100
) -> dict:
    """Run every disorder/grading identity; returns residuals and dimensions.

    All identities are exact in exact arithmetic, so every residual is
    floating-point roundoff; the caller compares against a tolerance.
    """
    rng = np.random.default_rng(seed)
    sys = CarSystem(n_left, n_right)
    res: dict[str, float] = {}
    res["car_relations"] = sys.car_residual()
    res["grading"] = sys.grading_residual()
    res["twist_identity"] = twist_identity_residual(sys, _random_element(sys, rng))

    # graded permutation formula over pure-grade elements on disjoint modes
    elements = []
    for i in range(sys.n_modes):
        if i % 2 == 0:
            M = rng.normal() * sys.a[i] + rng.normal() * sys.adag[i]
            elements.append(CarElement(M, "odd", (i,)))
        else:
            M = rng.normal() * sys.number_op(i) + rng.normal() * (
                sys.a[i] @ sys.adag[i]
            )
            elements.append(CarElement(M, "even", (i,)))
    worst = 0.0
    for sigma in itertools.permutations(range(sys.n_modes)):
        worst = max(worst, verify_graded_permute(sys, elements, sigma))
    res["graded_permute"] = worst

    res["disorder_conjugation"] = disorder_conjugation_residual(sys)
    res["disorder_uniqueness"] = disorder_uniqueness_residual(
        sys, random_even_unitary(sys, sys.right_modes, rng)
    )

    # conditional expectation axioms
    A = _random_element(sys, rng)
    B = conditional_expectation(sys, _random_element(sys, rng))
    C = conditional_expectation(sys, _random_element(sys, rng))
    mA = conditional_expectation(sys, A)
    res["cond_exp_unital"] = opnorm(
        conditional_expectation(sys, sys.element(sys.identity)).matrix - sys.identity
    )
    res["cond_exp_idempotent"] = opnorm(
        conditional_expectation(sys, mA).matrix - mA.matrix
    )
    res["cond_exp_adjoint"] = opnorm(
        conditional_expectation(sys, sys.element(A.matrix.conj().T)).matrix
        - mA.matrix.conj().T
    )
    sandwich = sys.element(B.matrix @ A.matrix @ C.matrix)
    res["cond_exp_bimodule"] = opnorm(
        conditional_expectation(sys, sandwich).matrix
        - B.matrix @ mA.matrix @ C.matrix
    )

    # beta automorphism laws on the extended algebra
    V = disorder_left(sys)
    fbasis = sys.algebra_basis(sys.right_modes)
    X = _random_hat_element(sys, rng, fbasis, V)
    Y = _random_hat_element(sys, rng, fbasis, V)
    bX = beta_automorphism(sys, X)
    res["beta_involution"] = opnorm(beta_automorphism(sys, bX).matrix - X.matrix)
    res["beta_multiplicative"] = opnorm(
        beta_automorphism(sys, sys.element(X.matrix @ Y.matrix)).matrix
        - bX.matrix @ beta_automorphism(sys, Y).matrix
    )
    F_only = sys.element(sum((rng.normal() + 1j * rng.normal()) * b.matrix for b in fbasis))
    res["beta_fixes_f"] = opnorm(beta_automorphism(sys, F_only).matrix - F_only.matrix)
    res["beta_flips_v"] = opnorm(beta_automorphism(sys, sys.element(V.matrix)).matrix + V.matrix)
    u = random_even_unitary(sys, sys.right_modes, rng)
    V_alt = sys.element(u @ V.matrix)
    res["beta_v_independent"] = opnorm(
        beta_automorphism(sys, X, V=V_alt).matrix - bX.matrix
    )

    nets = fixed_point_nets(sys)
    for key, val in nets.residuals.items():
        res[f"fixed_points_{key}"] = val

    # sin approximant bounds on random matrices (slack <= 0 expected)
    worst_slack = -np.inf
    for _ in range(n_lemma_matrices):
        T = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        for eps in (0.2, 0.5, 1.0, 2.0, 5.0):
            slack_norm, slack_vec = sin_approximant_bounds(T, eps)
            worst_slack = max(worst_slack, slack_norm, slack_vec)
    res["sin_approximant"] = max(worst_slack, 0.0)

    return {
        "residuals": res,
        "dims": nets.dims,
        "expected_dims": nets.expected_dims,
        "dims_match": nets.dims == nets.expected_dims,
    }


# -- sin approximant --------------------------------------------------------


def sin_approximant(T: np.ndarray, eps: float) -> np.ndarray:
    """C_eps = V eps^-1 sin(eps |T|) from the polar decomposition T = V|T|.

    Satisfies ||C_eps|| <= 1/eps and ||(T - C_eps) psi|| <= eps ||T*T psi||.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    T = np.asarray(T, dtype=complex)
    U, s, Vh = np.linalg.svd(T)
    return (U * (np.sin(eps * s) / eps)) @ Vh


def sin_approximant_bounds(T: np.ndarray, eps: float) -> tuple:
    """(norm slack, worst basis-vector bound slack); both <= 0 when the
    lemma's inequalities hold."""
    T = np.asarray(T, dtype=complex)
    C = sin_approximant(T, eps)
    slack_norm = opnorm(C) - 1.0 / eps
    D = T - C
    TT = T.conj().T @ T
    worst = -np.inf
    for j in range(T.shape[1]):
        e = np.zeros(T.shape[1])
        e[j] = 1.0
        lhs = np.linalg.norm(D @ e)
        rhs = eps * np.linalg.norm(TT @ e)
        worst = max(worst, lhs - rhs)
    return float(slack_norm), float(worst)
