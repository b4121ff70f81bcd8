"""Two-particle scattering functions and their symmetry checks.

A scattering function S is meromorphic, analytic and bounded on the closed
strip 0 <= Im(zeta) <= pi, and satisfies

    S(zeta)^{-1} = S(-zeta) = conj(S(conj(zeta))) = S(zeta + i*pi).

Built-in families: the constants +1 and -1, a single sinh-pole factor

    S_b(zeta) = (sinh(zeta) - i*sin(b)) / (sinh(zeta) + i*sin(b)),

and finite products of such factors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

DEFAULT_POLE_RADIUS = 1e-9
DEFAULT_SYMMETRY_TOL = 1e-12


class PoleEvaluationError(ValueError):
    """Raised when a scattering function is evaluated too close to a pole."""


@dataclass(frozen=True)
class ScatteringFunction:
    """Evaluable scattering function with symmetry metadata.

    kind is one of "constant", "sinh_factor", "product".  parameters holds
    the constant value or the pole parameters b_i.  poles lists the declared
    pole locations of the meromorphic continuation (never inside the closed
    strip for built-ins).
    """

    kind: str
    parameters: tuple
    evaluator: Callable[[np.ndarray], np.ndarray]
    poles: tuple = ()
    pole_radius: float = DEFAULT_POLE_RADIUS

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        if self.poles:
            for p in self.poles:
                if np.any(np.abs(zeta - p) < self.pole_radius):
                    raise PoleEvaluationError(
                        f"evaluation within {self.pole_radius} of pole {p}"
                    )
        return self.evaluator(zeta)

    @property
    def is_constant_minus_one(self) -> bool:
        return self.kind == "constant" and self.parameters[0] == -1

    def label(self) -> str:
        if self.kind == "constant":
            return f"S={int(self.parameters[0]):+d}"
        if self.kind == "sinh_factor":
            return f"S_b(b={self.parameters[0]:.6g})"
        return "S_prod(b=" + ",".join(f"{b:.4g}" for b in self.parameters) + ")"


def constant(value: int) -> ScatteringFunction:
    """S identically +1 or -1."""
    if value not in (1, -1):
        raise ValueError("constant scattering function must be +1 or -1")
    c = complex(value)
    return ScatteringFunction(
        kind="constant",
        parameters=(value,),
        evaluator=lambda zeta: np.full_like(np.asarray(zeta, dtype=complex), c),
    )


def _sinh_factor_poles(b: float, periods: int = 2) -> tuple:
    # sinh(zeta) = -i sin(b)  <=>  zeta = i(-b + 2 pi k) or i(pi + b + 2 pi k)
    out = []
    for k in range(-periods, periods + 1):
        out.append(1j * (-b + 2 * np.pi * k))
        out.append(1j * (np.pi + b + 2 * np.pi * k))
    return tuple(out)


def sinh_factor(b: float) -> ScatteringFunction:
    """Single-factor S_b; analytic on the closed strip for 0 < b < pi/2."""
    if not 0 < b < np.pi / 2:
        raise ValueError("pole parameter b must lie in (0, pi/2)")
    sb = np.sin(b)

    def ev(zeta):
        sh = np.sinh(zeta)
        return (sh - 1j * sb) / (sh + 1j * sb)

    return ScatteringFunction(
        kind="sinh_factor",
        parameters=(b,),
        evaluator=ev,
        poles=_sinh_factor_poles(b),
    )


def sinh_product(bs: Sequence[float]) -> ScatteringFunction:
    """Finite product of sinh-pole factors."""
    factors = [sinh_factor(b) for b in bs]

    def ev(zeta):
        out = np.ones_like(np.asarray(zeta, dtype=complex))
        for f in factors:
            out = out * f.evaluator(zeta)
        return out

    poles = tuple(p for f in factors for p in f.poles)
    return ScatteringFunction(
        kind="product", parameters=tuple(bs), evaluator=ev, poles=poles
    )


BUILTIN_FAMILIES = {
    "const_plus": lambda: constant(1),
    "const_minus": lambda: constant(-1),
    "sinh_factor": lambda b=np.pi / 4: sinh_factor(b),
    "sinh_product": lambda bs=(np.pi / 4, np.pi / 6): sinh_product(bs),
}


def from_config(cfg: dict) -> ScatteringFunction:
    """Build a scattering function from a config table, e.g.
    {kind = "sinh_factor", b = 0.7853981633974483}."""
    kind = cfg["kind"]
    if kind == "constant":
        return constant(int(cfg["value"]))
    if kind == "sinh_factor":
        return sinh_factor(float(cfg["b"]))
    if kind == "product":
        return sinh_product([float(b) for b in cfg["bs"]])
    raise ValueError(f"unknown scattering function kind {kind!r}")


def strip_samples(
    n: int,
    re_range=(-3.0, 3.0),
    im_range=(0.15, np.pi - 0.15),
    seed: int | None = None,
) -> np.ndarray:
    """Low-discrepancy samples in the open strip, away from the boundary."""
    h = qmc.Halton(d=2, scramble=seed is not None, seed=seed)
    pts = h.random(n)
    re = re_range[0] + (re_range[1] - re_range[0]) * pts[:, 0]
    im = im_range[0] + (im_range[1] - im_range[0]) * pts[:, 1]
    return re + 1j * im


@dataclass
class SymmetryReport:
    """Residuals of the defining symmetry relations over a sample set."""

    label: str
    n_samples: int
    residuals: dict = field(default_factory=dict)
    tol: float = DEFAULT_SYMMETRY_TOL

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tol

    def rows(self):
        return [(k, v, v < self.tol) for k, v in sorted(self.residuals.items())]


def verify_symmetries(
    S: ScatteringFunction,
    samples: np.ndarray,
    tol: float = DEFAULT_SYMMETRY_TOL,
    allow_boundary_poles: bool = False,
) -> SymmetryReport:
    """Check S(zeta)^{-1} = S(-zeta) = conj(S(conj zeta)) = S(zeta+i pi)
    plus unitarity on the real line, sample-wise."""
    samples = np.asarray(samples, dtype=complex)
    if not allow_boundary_poles and S.poles:
        keep = np.ones(len(samples), dtype=bool)
        for p in S.poles:
            keep &= np.abs(samples - p) > 1e-6
        samples = samples[keep]
    v = S(samples)
    v_neg = S(-samples)
    v_conj = np.conj(S(np.conj(samples)))
    v_shift = S(samples + 1j * np.pi)
    theta = np.real(samples)
    report = SymmetryReport(label=S.label(), n_samples=len(samples), tol=tol)
    report.residuals = {
        "inverse_vs_negated": float(np.max(np.abs(1.0 / v - v_neg))),
        "negated_vs_conjugated": float(np.max(np.abs(v_neg - v_conj))),
        "conjugated_vs_shifted": float(np.max(np.abs(v_conj - v_shift))),
        "real_line_unitarity": float(np.max(np.abs(S(theta) * S(-theta) - 1.0))),
    }
    return report
