"""Truncated, rapidity-discretized S-symmetric Fock space.

States live on a uniform rapidity grid with quadrature weight dtheta per
node; the n-particle sector is a full rank-n complex tensor over the nodes.
Creation/annihilation operators obey the Zamolodchikov relations

    z+(a) z+(b) = S(a-b) z+(b) z+(a)
    z(a)  z(b)  = S(a-b) z(b)  z(a)
    z(b)  z+(a) = S(a-b) z+(a) z(b) + delta(a-b) 1

exactly at the discrete level, with the delta realized as delta_jk/dtheta.
"""

from __future__ import annotations

import itertools
import math
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from .smatrix import ScatteringFunction


class TruncationWarning(UserWarning):
    """A creation operator pushed weight past the particle-number cutoff."""


@dataclass(frozen=True)
class RapidityGrid:
    """Uniform rapidity nodes with the mass-shell momentum map attached."""

    theta_min: float
    theta_max: float
    n_points: int
    mass: float

    def __post_init__(self):
        if self.n_points < 2:
            raise ValueError("need at least two grid points")
        if self.theta_max <= self.theta_min:
            raise ValueError("theta_max must exceed theta_min")
        if self.mass <= 0:
            raise ValueError("mass must be positive")

    @property
    def spacing(self) -> float:
        return (self.theta_max - self.theta_min) / (self.n_points - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.theta_min, self.theta_max, self.n_points)

    @property
    def p0(self) -> np.ndarray:
        return self.mass * np.cosh(self.nodes)

    @property
    def p1(self) -> np.ndarray:
        return self.mass * np.sinh(self.nodes)

    @classmethod
    def from_config(cls, cfg: dict) -> "RapidityGrid":
        return cls(
            theta_min=float(cfg["theta_min"]),
            theta_max=float(cfg["theta_max"]),
            n_points=int(cfg["n_points"]),
            mass=float(cfg["mass"]),
        )


class FockState:
    """Sparse-by-sector container: particle number -> rank-n tensor."""

    __slots__ = ("sectors",)

    def __init__(self, sectors: dict | None = None):
        self.sectors = {n: np.asarray(t, dtype=complex) for n, t in (sectors or {}).items()}

    def sector(self, n: int, n_points: int) -> np.ndarray:
        if n in self.sectors:
            return self.sectors[n]
        return np.zeros((n_points,) * n, dtype=complex)

    def __add__(self, other: "FockState") -> "FockState":
        out = {n: t.copy() for n, t in self.sectors.items()}
        for n, t in other.sectors.items():
            out[n] = out[n] + t if n in out else t.copy()
        return FockState(out)

    def __sub__(self, other: "FockState") -> "FockState":
        return self + (other * (-1.0))

    def __mul__(self, c) -> "FockState":
        return FockState({n: c * t for n, t in self.sectors.items()})

    __rmul__ = __mul__

    def max_sector(self) -> int:
        return max(self.sectors, default=0)

    def copy(self) -> "FockState":
        return FockState({n: t.copy() for n, t in self.sectors.items()})


def _compose_grades(a: str, b: str) -> str:
    if "mixed" in (a, b):
        return "mixed"
    return "even" if a == b else "odd"


class FockOperator:
    """Linear operator on the truncated space, carried as a lazy action.

    Dense matrices (over the lexicographic node basis, orthonormalized with
    the quadrature weights) are materialized on demand for a chosen domain
    sector cutoff; see FockSpace.matrix.
    """

    def __init__(self, space: "FockSpace", apply_fn, grade: str = "mixed", label: str = ""):
        self.space = space
        self._apply = apply_fn
        self.grade = grade
        self.label = label

    def __call__(self, state: FockState) -> FockState:
        return self._apply(state)

    def __add__(self, other: "FockOperator") -> "FockOperator":
        grade = self.grade if self.grade == other.grade else "mixed"
        return FockOperator(
            self.space, lambda s: self(s) + other(s), grade, f"({self.label}+{other.label})"
        )

    def __sub__(self, other: "FockOperator") -> "FockOperator":
        return self + (other * (-1.0))

    def __mul__(self, c) -> "FockOperator":
        return FockOperator(self.space, lambda s: self(s) * c, self.grade, self.label)

    __rmul__ = __mul__

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(
            self.space,
            lambda s: self(other(s)),
            _compose_grades(self.grade, other.grade),
            f"{self.label}@{other.label}",
        )


class ReflectionMap:
    """The antiunitary sector-wise reflection J (or the full PCT map Z.J)."""

    def __init__(self, space: "FockSpace", twisted: bool = False):
        self.space = space
        self.twisted = twisted
        self.antiunitary = True

    def __call__(self, state: FockState) -> FockState:
        out = {}
        for n, t in state.sectors.items():
            r = np.conj(np.transpose(t, axes=tuple(reversed(range(n))))) if n else np.conj(t)
            if self.twisted and n % 2 == 1:
                r = -1j * r
            out[n] = r
        return FockState(out)


class FockSpace:
    """Bundles grid, scattering function and truncation; owns all operators."""

    def __init__(self, grid: RapidityGrid, S: ScatteringFunction, n_max: int = 3):
        self.grid = grid
        self.S = S
        self.n_max = n_max
        theta = grid.nodes
        self.smat = np.asarray(S(theta[:, None] - theta[None, :]))
        self._sym_cache: dict[int, list] = {}
        self._proj_cache: dict[int, np.ndarray] = {}
        self._energy_cache: dict[int, np.ndarray] = {}

    # -- basis bookkeeping -------------------------------------------------

    def sector_dim(self, n: int) -> int:
        return self.grid.n_points ** n

    def total_dim(self, n_top: int | None = None) -> int:
        n_top = self.n_max if n_top is None else n_top
        return sum(self.sector_dim(n) for n in range(n_top + 1))

    def basis_indices(self, n_top: int | None = None):
        """Yield (sector, multi-index) in enumeration order."""
        n_top = self.n_max if n_top is None else n_top
        for n in range(n_top + 1):
            for idx in itertools.product(range(self.grid.n_points), repeat=n):
                yield n, idx

    # -- states ------------------------------------------------------------

    def vacuum(self) -> FockState:
        return FockState({0: np.ones(())})

    def one_particle(self, vec) -> FockState:
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (self.grid.n_points,):
            raise ValueError("one-particle vector must match the grid")
        return FockState({1: vec})

    def kernel_vector(self, j: int) -> np.ndarray:
        """Discrete delta at node j, normalized so <e_i, kernel_j> = d_ij."""
        v = np.zeros(self.grid.n_points, dtype=complex)
        v[j] = 1.0 / self.grid.spacing
        return v

    def inner(self, a: FockState, b: FockState) -> complex:
        d = self.grid.spacing
        acc = 0.0 + 0.0j
        for n, ta in a.sectors.items():
            if n in b.sectors:
                acc += d**n * np.vdot(ta, b.sectors[n])
        return acc

    def norm(self, a: FockState) -> float:
        return math.sqrt(max(self.inner(a, a).real, 0.0))

    # -- S-symmetrization --------------------------------------------------

    def _adjacent_swap_phase(self, n: int, i: int) -> np.ndarray:
        """Phase tensor S(theta_{i+1} - theta_i) broadcast to rank n."""
        M = self.grid.n_points
        shape = [1] * n
        shape[i] = M
        shape[i + 1] = M
        # smat.T[x_i, x_{i+1}] = S(theta_{x_{i+1}} - theta_{x_i})
        return self.smat.T.reshape(shape)

    def _sym_terms(self, n: int):
        """Cached (axes, phase) pairs realizing the S-weighted projector.

        The exchange representation D(sigma) is generated from adjacent
        transpositions T_i: (T_i Psi)(theta) = S(theta_{i+1}-theta_i) *
        Psi(..., theta_{i+1}, theta_i, ...); phases for general sigma are
        obtained by composing generators (breadth-first over the group).
        """
        if n not in self._sym_cache:
            reached: dict[tuple, np.ndarray | None] = {tuple(range(n)): None}
            frontier = [tuple(range(n))]
            while frontier:
                nxt = []
                for sigma in frontier:
                    phase = reached[sigma]
                    for i in range(n - 1):
                        tau_axes = list(range(n))
                        tau_axes[i], tau_axes[i + 1] = tau_axes[i + 1], tau_axes[i]
                        # rho = tau_i o sigma: swap the values i, i+1 inside sigma
                        rho = tuple(tau_axes[v] for v in sigma)
                        gen = self._adjacent_swap_phase(n, i)
                        if phase is None:
                            new_phase = np.broadcast_to(gen, gen.shape).copy()
                        else:
                            # T_i D(sigma): gen(theta) * phase(theta^tau_i)
                            perm_phase = np.transpose(
                                np.broadcast_to(phase, (self.grid.n_points,) * n),
                                axes=tau_axes,
                            )
                            new_phase = gen * perm_phase
                        if rho in reached:
                            continue
                        reached[rho] = new_phase
                        nxt.append(rho)
                frontier = nxt
            self._sym_cache[n] = [(sigma, phase) for sigma, phase in reached.items()]
        return self._sym_cache[n]

    def s_symmetrize(self, tensor: np.ndarray) -> np.ndarray:
        """Project a rank-n tensor onto the S-symmetric subspace."""
        tensor = np.asarray(tensor, dtype=complex)
        n = tensor.ndim
        if n <= 1:
            return tensor.copy()
        acc = np.zeros_like(tensor)
        for sigma, phase in self._sym_terms(n):
            # evaluating Psi at permuted arguments theta^sigma means
            # transposing by the inverse permutation
            piece = np.transpose(tensor, axes=np.argsort(sigma))
            acc += piece if phase is None else phase * piece
        return acc / math.factorial(n)

    def _sym_batched(self, tensor: np.ndarray, n_axes: int) -> np.ndarray:
        """S-symmetrize the leading n_axes axes; trailing axes are spectators."""
        tensor = np.asarray(tensor, dtype=complex)
        if n_axes <= 1:
            return tensor.copy()
        extra = tensor.ndim - n_axes
        acc = np.zeros_like(tensor)
        for sigma, phase in self._sym_terms(n_axes):
            axes = tuple(np.argsort(sigma)) + tuple(range(n_axes, tensor.ndim))
            piece = np.transpose(tensor, axes=axes)
            if phase is None:
                acc += piece
            else:
                acc += phase.reshape(phase.shape + (1,) * extra) * piece
        return acc / math.factorial(n_axes)

    def projector_block(self, n: int) -> np.ndarray:
        """Dense kernel of P_S on sector n as a rank-2n tensor (rows, cols).

        Column multi-index c enumerates unit tensors e_c; the block is the
        batched symmetrization of the identity.  Cached per sector.
        """
        if n not in self._proj_cache:
            M = self.grid.n_points
            if n == 0:
                self._proj_cache[n] = np.ones((), dtype=complex)
            else:
                ident = np.eye(M**n, dtype=complex).reshape((M,) * (2 * n))
                self._proj_cache[n] = self._sym_batched(ident, n)
        return self._proj_cache[n]

    # -- ZF operators ------------------------------------------------------

    def create(self, psi, state: FockState, warn_overflow: bool = True) -> FockState:
        """Apply z+(psi); overflow past n_max is dropped with a warning."""
        psi = np.asarray(psi, dtype=complex)
        out = {}
        for n, t in state.sectors.items():
            if n + 1 > self.n_max:
                if warn_overflow and np.any(np.abs(t) > 1e-300):
                    warnings.warn(
                        f"creation out of the top sector n={n} dropped",
                        TruncationWarning,
                        stacklevel=2,
                    )
                continue
            raised = self.s_symmetrize(np.multiply.outer(psi, t))
            key = n + 1
            out[key] = out.get(key, 0) + math.sqrt(n + 1) * raised
        return FockState(out)

    def annihilate(self, phi, state: FockState) -> FockState:
        """Apply z(phi), linear in phi; the adjoint of z+(conj phi)."""
        phi = np.asarray(phi, dtype=complex)
        d = self.grid.spacing
        out = {}
        for n, t in state.sectors.items():
            if n == 0:
                continue
            lowered = d * np.tensordot(phi, t, axes=([0], [0]))
            key = n - 1
            out[key] = out.get(key, 0) + math.sqrt(n) * lowered
        return FockState(out)

    def zdag(self, psi, label: str = "z+") -> FockOperator:
        return FockOperator(self, lambda s: self.create(psi, s), grade="odd", label=label)

    def z(self, phi, label: str = "z") -> FockOperator:
        return FockOperator(self, lambda s: self.annihilate(phi, s), grade="odd", label=label)

    def kernel_zdag(self, j: int) -> FockOperator:
        return self.zdag(self.kernel_vector(j), label=f"z+[{j}]")

    def kernel_z(self, j: int) -> FockOperator:
        return self.z(self.kernel_vector(j), label=f"z[{j}]")

    # -- diagonal and structural operators ---------------------------------

    def _sector_scalar_op(self, scalar_of_n, grade: str, label: str) -> FockOperator:
        def ap(state):
            return FockState({n: scalar_of_n(n) * t for n, t in state.sectors.items()})

        return FockOperator(self, ap, grade=grade, label=label)

    def grading(self) -> FockOperator:
        """Gamma = (-1)^N."""
        return self._sector_scalar_op(lambda n: (-1.0) ** n, "even", "Gamma")

    def twist(self) -> FockOperator:
        """Z = (1-i)/2 + (1+i)/2 Gamma; unitary, Z psi = -i psi on odd sectors."""
        return self._sector_scalar_op(
            lambda n: 1.0 + 0.0j if n % 2 == 0 else -1.0j, "even", "Z"
        )

    def number(self) -> FockOperator:
        return self._sector_scalar_op(lambda n: float(n), "even", "N")

    def symmetrizer(self) -> FockOperator:
        """Orthogonal projection onto the S-symmetric subspace, sector-wise."""

        def ap(state):
            return FockState({n: self.s_symmetrize(t) for n, t in state.sectors.items()})

        return FockOperator(self, ap, grade="even", label="P_S")

    def _node_phase_apply(self, phase: np.ndarray, state: FockState) -> FockState:
        out = {}
        for n, t in state.sectors.items():
            r = t.copy()
            for ax in range(n):
                shape = [1] * n
                shape[ax] = self.grid.n_points
                r = r * phase.reshape(shape)
            out[n] = r
        return FockState(out)

    def translate(self, x) -> FockOperator:
        """U(x), diagonal phase exp(i sum_j p(theta_j).x), metric p.x = p0 x0 - p1 x1."""
        x0, x1 = float(x[0]), float(x[1])
        phase = np.exp(1j * (self.grid.p0 * x0 - self.grid.p1 * x1))
        return FockOperator(
            self,
            lambda s: self._node_phase_apply(phase, s),
            grade="even",
            label=f"U({x0:.3g},{x1:.3g})",
        )

    def _sector_energy(self, n: int) -> np.ndarray:
        if n not in self._energy_cache:
            e = self.grid.mass * np.cosh(self.grid.nodes)
            acc = np.zeros((self.grid.n_points,) * n)
            for ax in range(n):
                shape = [1] * n
                shape[ax] = self.grid.n_points
                acc = acc + e.reshape(shape)
            self._energy_cache[n] = acc
        return self._energy_cache[n]

    def hamiltonian(self) -> FockOperator:
        """Diagonal H with eigenvalue sum_j mass*cosh(theta_j)."""

        def ap(state):
            return FockState({n: self._sector_energy(n) * t for n, t in state.sectors.items()})

        return FockOperator(self, ap, grade="even", label="H")

    def reflect(self) -> ReflectionMap:
        """Antiunitary J: (J psi)_n(t1..tn) = conj(psi_n(tn..t1))."""
        return ReflectionMap(self, twisted=False)

    def uj(self) -> ReflectionMap:
        """The full antiunitary reflection U(j) = Z o J."""
        return ReflectionMap(self, twisted=True)

    # -- coordinates, matrices, norms --------------------------------------

    def to_coords(self, state: FockState, n_top: int | None = None) -> np.ndarray:
        """Flatten into the orthonormalized enumeration basis."""
        n_top = self.n_max if n_top is None else n_top
        d = self.grid.spacing
        parts = []
        for n in range(n_top + 1):
            t = state.sector(n, self.grid.n_points)
            parts.append((d ** (n / 2.0)) * t.reshape(-1))
        return np.concatenate(parts)

    def from_coords(self, vec: np.ndarray, n_top: int | None = None) -> FockState:
        n_top = self.n_max if n_top is None else n_top
        d = self.grid.spacing
        out = {}
        pos = 0
        for n in range(n_top + 1):
            size = self.sector_dim(n)
            block = vec[pos : pos + size]
            pos += size
            out[n] = (d ** (-n / 2.0)) * np.asarray(block, dtype=complex).reshape(
                (self.grid.n_points,) * n
            )
        return FockState(out)

    def basis_state(self, n: int, idx: tuple) -> FockState:
        """Orthonormal basis state: unit tensor at idx scaled by dtheta^(-n/2)."""
        t = np.zeros((self.grid.n_points,) * n, dtype=complex)
        t[idx] = self.grid.spacing ** (-n / 2.0)
        return FockState({n: t})

    def matrix(self, op, domain_n_top: int, codomain_n_top: int | None = None) -> np.ndarray:
        """Dense matrix of op on the orthonormalized basis, domain restricted."""
        codomain_n_top = self.n_max if codomain_n_top is None else codomain_n_top
        cols = []
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            for n, idx in self.basis_indices(domain_n_top):
                out = op(self.basis_state(n, idx))
                cols.append(self.to_coords(out, codomain_n_top))
        return np.stack(cols, axis=1)

    def operator_norm(self, op, domain_n_top: int, codomain_n_top: int | None = None) -> float:
        """Spectral norm of op restricted to domain sectors <= domain_n_top."""
        m = self.matrix(op, domain_n_top, codomain_n_top)
        if m.size == 0:
            return 0.0
        return float(np.linalg.svd(m, compute_uv=False)[0])

    def grade_residual(self, op: FockOperator, domain_n_top: int | None = None) -> dict:
        """Norms of [Gamma,A] and {Gamma,A}; an even/odd tag zeroes one of them."""
        domain_n_top = (self.n_max - 1) if domain_n_top is None else domain_n_top
        G = self.grading()
        comm = G @ op - op @ G
        anti = G @ op + op @ G
        return {
            "commutator": self.operator_norm(comm, domain_n_top),
            "anticommutator": self.operator_norm(anti, domain_n_top),
        }


# -- ZF relation verification ---------------------------------------------


@dataclass
class ZfReport:
    """Operator-norm residuals of the three Zamolodchikov relations."""

    label: str
    sample_nodes: tuple
    residuals: dict = field(default_factory=dict)
    tol: float = 1e-10

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tol


def verify_zf_relations(
    space: FockSpace, sample_nodes=None, tol: float = 1e-10
) -> ZfReport:
    """Build both sides of the Zamolodchikov relations as matrices and
    report the worst operator-norm residual over sampled node pairs.

    Domains are chosen so that no product leaks past the truncation:
    z+z+ acts on sectors <= n_max-2, the mixed relation on <= n_max-1.
    """
    if space.n_max < 3:
        raise ValueError("need n_max >= 3 for a meaningful relation check")
    M = space.grid.n_points
    if sample_nodes is None:
        sample_nodes = tuple(sorted({0, M // 3, (2 * M) // 3, M - 1}))
    theta = space.grid.nodes
    d = space.grid.spacing
    res_cc = res_aa = res_mixed = 0.0
    # Relations hold on the physical (S-symmetric) subspace; composing with
    # the orthogonal projector P_S gives exactly the restricted operator, and
    # the Frobenius norm of the result upper-bounds the spectral norm.  On
    # the projected unit-tensor basis every kernel-operator product reduces
    # to index slices of the dense symmetrizer blocks: annihilators contract
    # against delta kernels (row slices), and creators compose with P_S into
    # a higher block thanks to P_{n+1} (1 x P_n) = P_{n+1} (column slices).

    def f2(D):
        return float(np.real(np.vdot(D, D)))

    for i in sample_nodes:
        for j in sample_nodes:
            s_ij = complex(space.S(theta[i] - theta[j]))
            s_ji = complex(space.S(theta[j] - theta[i]))
            cc2 = aa2 = mx2 = 0.0
            # z+ z+ exchange: domain sectors n <= n_max - 2, output n + 2.
            # z+_i z+_j P e_c = sqrt((n+1)(n+2))/d^2 * P(e_i x e_j x e_c).
            for n in range(space.n_max - 1):
                P2 = space.projector_block(n + 2)
                rows = (slice(None),) * (n + 2)
                D = P2[rows + (i, j)] - s_ij * P2[rows + (j, i)]
                cc2 += (n + 1) * (n + 2) / d**2 * f2(D)
            # z z exchange: domain sectors n <= n_max (rows sliced off).
            for n in range(2, space.n_max + 1):
                P = space.projector_block(n)
                D = P[(j, i)] - s_ij * P[(i, j)]
                aa2 += n * (n - 1) / d**2 * f2(D)
            # mixed relation with delta: domain sectors n <= n_max - 1.
            for n in range(space.n_max):
                P1 = space.projector_block(n + 1)
                Pn = space.projector_block(n)
                t1 = ((n + 1) / d) * P1[(i,) + (slice(None),) * n + (j,)]
                if n >= 1:
                    X = np.zeros((M,) * (2 * n), dtype=complex)
                    X[j] = Pn[i]
                    t1 = t1 - (s_ji * n / d) * space._sym_batched(X, n)
                if i == j:
                    t1 = t1 - (1.0 / d) * Pn
                mx2 += f2(t1)
            res_cc = max(res_cc, math.sqrt(cc2))
            res_aa = max(res_aa, math.sqrt(aa2))
            res_mixed = max(res_mixed, math.sqrt(mx2))
    rep = ZfReport(label=space.S.label(), sample_nodes=tuple(sample_nodes), tol=tol)
    rep.residuals = {
        "creator_exchange": res_cc,
        "annihilator_exchange": res_aa,
        "mixed_with_delta": res_mixed,
    }
    return rep


# -- binary state dump -----------------------------------------------------

_MAGIC = b"ZFQF"
_HEADER = struct.Struct("<4sHHH6x")  # magic, version, n_points, n_max, pad to 16


def save_state(path, state: FockState, space: FockSpace, version: int = 1) -> None:
    """Dump sectors 0..n_max as little-endian f64 (re, im) pairs."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, version, space.grid.n_points, space.n_max))
        for n in range(space.n_max + 1):
            t = state.sector(n, space.grid.n_points).astype("<c16")
            fh.write(t.tobytes())


def load_state(path) -> tuple[FockState, dict]:
    """Read a state dump; returns the state and the header fields."""
    with open(path, "rb") as fh:
        magic, version, n_points, n_max = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != _MAGIC:
            raise ValueError("not a ZFQF state dump")
        sectors = {}
        for n in range(n_max + 1):
            count = n_points**n
            raw = np.frombuffer(fh.read(16 * count), dtype="<c16")
            sectors[n] = raw.reshape((n_points,) * n).astype(complex)
    return FockState(sectors), {"version": version, "n_points": n_points, "n_max": n_max}
