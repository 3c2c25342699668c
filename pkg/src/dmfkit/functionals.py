"""The three density-matrix energy functionals and their gradients.

For a spatial density matrix gamma (occupations in [0,1]) over an
orthonormal basis with one-body matrix h and repulsion tensor (ij|kl):

    E_HF      = q tr(h gamma) + D[gamma] - X[gamma]
    E_Mueller = q tr(h gamma) + D[gamma] - X[sqrt(gamma)]
    E_CA      = q tr(h gamma) + D[gamma] - X[gamma] - X[sqrt(gamma(1-gamma))]

with the direct and exchange quadratic forms

    D[gamma] = 1/2 <gamma, J(gamma)>,   J(gamma)_ij = q^2 sum_kl (ij|kl) gamma_kl
    X[delta] = 1/2 <delta, K(delta)>,   K(delta)_ij = q   sum_kl (ik|jl) delta_kl

The spin-restricted convention folds the spin factors into J and K: the
spatial gamma stands for the q-fold spin block, so the number of
particles is q * tr(gamma).  Both quadratic forms are nonnegative because
the (ij|kl) pair matrix is positive semidefinite.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .integrals import IntegralSet
from .rdm import DensityMatrix, SpectralFunction, divided_differences

__all__ = [
    "FunctionalKind",
    "EnergyBreakdown",
    "coulomb_matrix",
    "exchange_map",
    "energy",
    "gradient",
]

#: eigenvalue slack accepted by energy() and gradient()
FEASIBILITY_TOL = 1e-8


class FunctionalKind(enum.Enum):
    HF = "hf"
    MUELLER = "mueller"
    CA = "ca"

    @property
    def exchange_functions(self) -> tuple[SpectralFunction, ...]:
        """Spectral functions whose exchange terms are subtracted."""
        if self is FunctionalKind.HF:
            return (SpectralFunction.IDENTITY,)
        if self is FunctionalKind.MUELLER:
            return (SpectralFunction.SQRT,)
        return (SpectralFunction.IDENTITY, SpectralFunction.SQRT_HOLE)


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy components in Hartree; total = one_body + direct - exchange_x - exchange_hole."""

    one_body: float
    direct: float
    exchange_x: float
    exchange_hole: float

    @property
    def total(self) -> float:
        return self.one_body + self.direct - self.exchange_x - self.exchange_hole

    def as_dict(self) -> dict:
        return {
            "one_body_ha": self.one_body,
            "direct_ha": self.direct,
            "exchange_x_ha": self.exchange_x,
            "exchange_hole_ha": self.exchange_hole,
            "total_ha": self.total,
        }


def _check_dims(iset: IntegralSet, m: np.ndarray) -> None:
    if m.shape != (iset.n, iset.n):
        raise ValueError(f"dimension mismatch: matrix {m.shape} vs basis n={iset.n}")


def coulomb_matrix(iset: IntegralSet, g: DensityMatrix | np.ndarray) -> np.ndarray:
    """J(gamma)_ij = q^2 sum_kl (ij|kl) gamma_kl; 1/2 <gamma, J> is the direct energy."""
    gm = g.m if isinstance(g, DensityMatrix) else np.asarray(g, dtype=float)
    _check_dims(iset, gm)
    n = iset.n
    J = (iset.pair_matrix() @ gm.ravel()).reshape(n, n)
    J = 0.5 * (J + J.T)
    return (iset.q * iset.q) * J


def exchange_map(iset: IntegralSet, d: np.ndarray) -> np.ndarray:
    """K(delta)_ij = q sum_kl (ik|jl) delta_kl; 1/2 <delta, K> is the exchange form X[delta]."""
    d = d.m if isinstance(d, DensityMatrix) else np.asarray(d, dtype=float)
    _check_dims(iset, d)
    n = iset.n
    K = (iset.exchange_matrix() @ d.ravel()).reshape(n, n)
    K = 0.5 * (K + K.T)
    return iset.q * K


def exchange_energy(iset: IntegralSet, d: np.ndarray) -> float:
    """X[delta] = 1/2 <delta, K(delta)> (includes the spin factor q)."""
    return 0.5 * float(np.sum(np.asarray(d) * exchange_map(iset, d)))


def _require_feasible(g: DensityMatrix) -> None:
    if not g.is_feasible(FEASIBILITY_TOL):
        lam = g.eigenvalues
        raise ValueError(
            f"density matrix infeasible: eigenvalues in [{lam[0]:.3e}, {lam[-1]:.3e}] "
            f"exceed [0,1] by more than {FEASIBILITY_TOL:.0e}"
        )


def energy(iset: IntegralSet, g: DensityMatrix, kind: FunctionalKind) -> EnergyBreakdown:
    """Evaluate the requested functional at a feasible density matrix."""
    _check_dims(iset, g.m)
    _require_feasible(g)
    lam = np.clip(g.eigenvalues, 0.0, 1.0)
    U = g.eigenvectors
    gm = (U * lam) @ U.T
    one_body = iset.q * float(np.sum(iset.h * gm))
    direct = 0.5 * float(np.sum(gm * coulomb_matrix(iset, gm)))
    fs = kind.exchange_functions
    x_first = 0.0
    x_hole = 0.0
    for f in fs:
        d = (U * f.value_at(lam)) @ U.T
        val = 0.5 * float(np.sum(d * exchange_map(iset, d)))
        if f is SpectralFunction.SQRT_HOLE:
            x_hole = val
        else:
            x_first = val
    return EnergyBreakdown(one_body=one_body, direct=direct, exchange_x=x_first, exchange_hole=x_hole)


def gradient(iset: IntegralSet, g: DensityMatrix, kind: FunctionalKind) -> np.ndarray:
    """Frobenius gradient of ``energy`` at g.

    Chain rule: grad = q h + J(gamma) - sum_f Df(gamma)*[K(f(gamma))], with
    the Frechet adjoint realized by the (symmetric) divided-difference
    table in gamma's eigenbasis.  Exact at interior-spectrum points; on
    the active set the divided differences carry the 1/EPS_DD cap.
    """
    _check_dims(iset, g.m)
    _require_feasible(g)
    lam = np.clip(g.eigenvalues, 0.0, 1.0)
    U = g.eigenvectors
    gm = (U * lam) @ U.T
    grad = iset.q * iset.h + coulomb_matrix(iset, gm)
    for f in kind.exchange_functions:
        d = (U * f.value_at(lam)) @ U.T
        K = exchange_map(iset, d)
        table = divided_differences(f, lam)
        grad = grad - U @ (table * (U.T @ K @ U)) @ U.T
    return 0.5 * (grad + grad.T)


def idempotent_energy(iset: IntegralSet, g: DensityMatrix) -> float:
    """Shared total of all three functionals on a projector (diagnostic)."""
    return energy(iset, g, FunctionalKind.HF).total
