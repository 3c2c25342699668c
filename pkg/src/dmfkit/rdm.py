"""Density matrices with spectral calculus and feasible-set projection.

The feasible set is {gamma symmetric : 0 <= gamma <= 1, tr gamma <= N}.
Matrix functions and their Frechet derivatives act through the spectrum;
derivatives use first divided differences (the Daleckii-Krein rule) with
magnitudes capped at 1/EPS_DD to guard the square-root singularity at the
spectral boundary.
"""

from __future__ import annotations

import enum

import numpy as np

__all__ = [
    "EPS_DD",
    "SpectralFunction",
    "DensityMatrix",
    "apply_function",
    "frechet_apply",
    "project_feasible",
    "project_occupations",
    "project_sqrt_occupations",
    "random_feasible",
    "random_orthogonal",
]

#: divided-difference regularization scale; |f[a,b]| is capped at 1/EPS_DD
EPS_DD = 1e-8

_TINY = 1e-300


class SpectralFunction(enum.Enum):
    """The three occupation functions entering the energy functionals."""

    IDENTITY = "identity"
    SQRT = "sqrt"
    SQRT_HOLE = "sqrt_hole"

    def value_at(self, x: np.ndarray | float) -> np.ndarray:
        """f(x) after clamping the argument to [0, 1]."""
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        if self is SpectralFunction.IDENTITY:
            return x
        if self is SpectralFunction.SQRT:
            return np.sqrt(x)
        return np.sqrt(x * (1.0 - x))

    def derivative_at(self, x: np.ndarray | float) -> np.ndarray:
        """f'(x) on the clamped argument; infinite at the boundary for the roots."""
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        if self is SpectralFunction.IDENTITY:
            return np.ones_like(x)
        if self is SpectralFunction.SQRT:
            return 0.5 / np.maximum(np.sqrt(x), _TINY)
        return (1.0 - 2.0 * x) / np.maximum(2.0 * np.sqrt(x * (1.0 - x)), _TINY)


class DensityMatrix:
    """A real symmetric matrix with a cached spectral decomposition.

    Instances are immutable; the eigenvalues are ascending and the
    eigenvectors orthonormal.  ``is_feasible`` checks the spectral bounds
    0 <= lambda <= 1 up to a tolerance.
    """

    __slots__ = ("m", "eigenvalues", "eigenvectors")

    def __init__(self, matrix: np.ndarray, *, hermitian_tol: float = 1e-12):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {matrix.shape}")
        if np.max(np.abs(matrix - matrix.T), initial=0.0) > hermitian_tol:
            raise ValueError("matrix is not symmetric")
        self.m = 0.5 * (matrix + matrix.T)
        self.eigenvalues, self.eigenvectors = np.linalg.eigh(self.m)
        self.m.setflags(write=False)
        self.eigenvalues.setflags(write=False)
        self.eigenvectors.setflags(write=False)

    @classmethod
    def from_spectrum(cls, eigenvalues: np.ndarray, eigenvectors: np.ndarray) -> "DensityMatrix":
        lam = np.asarray(eigenvalues, dtype=float).copy()
        U = np.asarray(eigenvectors, dtype=float).copy()
        m = (U * lam) @ U.T
        m = 0.5 * (m + m.T)
        obj = cls.__new__(cls)
        obj.m = m
        obj.eigenvalues = lam
        obj.eigenvectors = U
        for a in (obj.m, obj.eigenvalues, obj.eigenvectors):
            a.setflags(write=False)
        return obj

    @property
    def n(self) -> int:
        return self.m.shape[0]

    def trace(self) -> float:
        return float(np.sum(self.eigenvalues))

    def is_feasible(self, tol: float = 1e-10) -> bool:
        lam = self.eigenvalues  # not necessarily sorted when built from_spectrum
        return bool(lam.min() >= -tol and lam.max() <= 1.0 + tol)

    def __repr__(self) -> str:  # pragma: no cover
        return f"DensityMatrix(n={self.n}, trace={self.trace():.6f})"


def apply_function(g: DensityMatrix, f: SpectralFunction) -> np.ndarray:
    """U f(lambda) U^T with eigenvalues clamped to [0, 1]."""
    fl = f.value_at(g.eigenvalues)
    return (g.eigenvectors * fl) @ g.eigenvectors.T


def divided_differences(f: SpectralFunction, lam: np.ndarray, cap: float = 1.0 / EPS_DD) -> np.ndarray:
    """First divided-difference table f[lam_a, lam_b], capped at +-cap.

    Equal (within 1e-12) eigenvalue pairs take f' at the midpoint.
    """
    lam = np.clip(np.asarray(lam, dtype=float), 0.0, 1.0)
    fx = f.value_at(lam)
    dx = lam[:, None] - lam[None, :]
    close = np.abs(dx) < 1e-12
    table = np.where(
        close,
        f.derivative_at(0.5 * (lam[:, None] + lam[None, :])),
        (fx[:, None] - fx[None, :]) / np.where(close, 1.0, dx),
    )
    return np.clip(table, -cap, cap)


def frechet_apply(g: DensityMatrix, f: SpectralFunction, H: np.ndarray) -> np.ndarray:
    """Frechet derivative Df(g)[H] via divided differences in g's eigenbasis."""
    H = np.asarray(H, dtype=float)
    if H.shape != g.m.shape:
        raise ValueError(f"shape mismatch: {H.shape} vs {g.m.shape}")
    if np.max(np.abs(H - H.T), initial=0.0) > 1e-10:
        raise ValueError("direction matrix is not symmetric")
    U = g.eigenvectors
    table = divided_differences(f, g.eigenvalues)
    return U @ (table * (U.T @ H @ U)) @ U.T


def project_occupations(lam: np.ndarray, budget: float) -> np.ndarray:
    """Project a real vector onto {x in [0,1]^n : sum x <= budget}.

    Clamping is optimal when the trace constraint is slack; otherwise
    the solution is clamp(lam - nu, 0, 1) with nu > 0 chosen so the sum
    hits the budget.  The sum is piecewise linear and monotone in nu, so
    nu is located by bisection on the kink grid and solved exactly on
    the final linear segment.
    """
    lam = np.asarray(lam, dtype=float)
    x = np.clip(lam, 0.0, 1.0)
    if x.sum() <= budget:
        return x
    kinks = np.concatenate((lam[lam > 0.0], lam[lam > 1.0] - 1.0, [0.0]))
    kinks = np.unique(kinks[kinks >= 0.0])
    sums = np.clip(lam[None, :] - kinks[:, None], 0.0, 1.0).sum(axis=1)
    idx = int(np.searchsorted(-sums, -budget, side="left"))
    idx = min(max(idx, 1), kinks.size - 1)
    nu_lo, nu_hi = kinks[idx - 1], kinks[idx]
    shifted = lam - 0.5 * (nu_lo + nu_hi)
    free = (shifted > 0.0) & (shifted < 1.0)
    n_free = int(np.count_nonzero(free))
    if n_free:
        nu = (lam[free].sum() + np.count_nonzero(shifted >= 1.0) - budget) / n_free
        nu = min(max(nu, nu_lo), nu_hi)
    else:
        nu = nu_hi  # plateau segment: the budget is met at its right end
    return np.clip(lam - nu, 0.0, 1.0)


def project_sqrt_occupations(x: np.ndarray, budget: float) -> np.ndarray:
    """Project onto {x in [0,1]^n : sum x^2 <= budget} (for sqrt(gamma) iterates).

    KKT form: clamp(x / s, 0, 1) with scale s >= 1; with k entries capped
    at 1 the scale is sqrt(sum of the remaining positive squares / (budget - k)),
    so the right k is found by scanning the descending order statistics.
    """
    x = np.asarray(x, dtype=float)
    y = np.clip(x, 0.0, 1.0)
    if np.sum(y * y) <= budget:
        return y
    desc = np.sort(x[x > 0.0])[::-1]
    sq = desc * desc
    total = sq.sum()
    running = 0.0  # sum of the k largest squares
    for k in range(desc.size):
        if budget - k <= 0.0:
            break
        scale = np.sqrt((total - running) / (budget - k))
        top_ok = k == 0 or desc[k - 1] >= scale
        low_ok = desc[k] < scale
        if scale >= 1.0 and top_ok and low_ok:
            return np.clip(x / scale, 0.0, 1.0)
        running += sq[k]
    # unreachable when the constraint binds; fall back to hard clamping
    return np.clip(x / max(1.0, float(desc[0])), 0.0, 1.0)


def project_feasible(A: np.ndarray, N: float) -> DensityMatrix:
    """Frobenius-nearest density matrix with spectrum in [0,1] and trace <= N."""
    A = np.asarray(A, dtype=float)
    if np.max(np.abs(A - A.T), initial=0.0) > 1e-10:
        raise ValueError("input matrix is not symmetric")
    if not N > 0:
        raise ValueError(f"particle budget must be positive, got {N}")
    lam, U = np.linalg.eigh(0.5 * (A + A.T))
    return DensityMatrix.from_spectrum(project_occupations(lam, N), U)


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish orthogonal matrix from the QR of a Gaussian matrix."""
    G = rng.normal(size=(n, n))
    Q, R = np.linalg.qr(G)
    return Q * np.sign(np.diag(R))


def random_feasible(n: int, N: float, seed: int) -> DensityMatrix:
    """Deterministic random feasible point: random eigenframe, uniform
    eigenvalues on [0,1], projected onto the budget-N feasible set."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if not N > 0:
        raise ValueError(f"particle budget must be positive, got {N}")
    rng = np.random.default_rng(seed)
    Q = random_orthogonal(n, rng)
    lam = rng.uniform(0.0, 1.0, size=n)
    return DensityMatrix.from_spectrum(project_occupations(lam, N), Q)
