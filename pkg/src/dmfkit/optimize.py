"""Minimization of the energy functionals over {0 <= gamma <= 1, q tr gamma <= N}.

The workhorse is projected gradient descent with a monotone backtracking
line search (Armijo fast path, then greedy step refinement), run from an
aufbau start plus a configurable number of seeded random feasible starts.

Two refinements proved necessary for the square-root functionals, whose
exact gradients blow up on the spectral boundary:

* Hartree-Fock and CA iterate in gamma; the descent direction bounds the
  divided differences at DIRECTION_DD_CAP (the public ``gradient`` keeps
  the 1/EPS_DD cap), and each sweep is followed by an exact occupation
  re-minimization at fixed natural orbitals (a sin^2 substitution makes
  that subproblem smooth).
* The Mueller functional is minimized in phi = sqrt(gamma), where the
  energy is a smooth polynomial, with a Barzilai-Borwein trial step.

Both paths are deterministic given the seed and keep the energy trace
non-increasing.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .functionals import EnergyBreakdown, FunctionalKind, energy as functional_energy
from .integrals import BasisSpec, IntegralSet, build_even_tempered
from .rdm import (
    DensityMatrix,
    divided_differences,
    project_occupations,
    project_sqrt_occupations,
    random_feasible,
)

__all__ = ["MinimizeOptions", "MinimizeResult", "ZscanRow", "minimize", "zscan", "aufbau_occupations"]

#: divided-difference bound used for descent directions only
DIRECTION_DD_CAP = 1e2
_SWEEP_ITERS = 60
_OUTER_ROUNDS = 40
_T_FLOOR = 1e-18
_BB_CAP = 1e4


@dataclass(frozen=True)
class MinimizeOptions:
    tol_step: float = 1e-8
    tol_energy: float = 1e-10
    max_iter: int = 5000
    step0: float = 1.0
    backtrack: float = 0.5
    armijo: float = 1e-4
    seed: int = 0
    starts: int = 3

    def __post_init__(self) -> None:
        for name in ("tol_step", "tol_energy", "step0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("backtrack", "armijo"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.max_iter < 1 or self.starts < 1:
            raise ValueError("max_iter and starts must be >= 1")


@dataclass
class MinimizeResult:
    gamma: DensityMatrix
    energy: EnergyBreakdown
    iterations: int
    converged: bool
    energy_trace: list[float]
    occupations: np.ndarray
    active_trace: bool
    start_energies: list[float] = field(default_factory=list)


def aufbau_occupations(n: int, budget: float) -> np.ndarray:
    """Occupation vector filling the first orbitals up to ``budget``."""
    occ = np.zeros(n)
    left = budget
    for i in range(n):
        occ[i] = min(1.0, left)
        left -= occ[i]
        if left <= 0:
            break
    return occ


class _GammaObjective:
    """Energy and bounded-slope descent direction as a function of (lam, U)."""

    def __init__(self, iset: IntegralSet, kind: FunctionalKind):
        self.q = iset.q
        self.h = iset.h
        self.pair = iset.pair_matrix()
        self.exch = iset.exchange_matrix()
        self.n = iset.n
        self.fs = kind.exchange_functions

    def value_grad(self, lam: np.ndarray, U: np.ndarray) -> tuple[float, np.ndarray]:
        q, n = self.q, self.n
        lam = np.clip(lam, 0.0, 1.0)
        gm = (U * lam) @ U.T
        J = (q * q) * (self.pair @ gm.ravel()).reshape(n, n)
        E = q * float(np.sum(self.h * gm)) + 0.5 * float(np.sum(gm * J))
        grad = q * self.h + J
        for f in self.fs:
            d = (U * f.value_at(lam)) @ U.T
            K = q * (self.exch @ d.ravel()).reshape(n, n)
            E -= 0.5 * float(np.sum(d * K))
            table = divided_differences(f, lam, cap=DIRECTION_DD_CAP)
            grad = grad - U @ (table * (U.T @ K @ U)) @ U.T
        return E, 0.5 * (grad + grad.T)


class _SqrtObjective:
    """Mueller energy as a smooth function of phi = sqrt(gamma)."""

    def __init__(self, iset: IntegralSet):
        self.q = iset.q
        self.h = iset.h
        self.pair = iset.pair_matrix()
        self.exch = iset.exchange_matrix()
        self.n = iset.n

    def value_grad(self, phi: np.ndarray) -> tuple[float, np.ndarray]:
        q, n = self.q, self.n
        gam = phi @ phi
        J = (q * q) * (self.pair @ gam.ravel()).reshape(n, n)
        K = q * (self.exch @ phi.ravel()).reshape(n, n)
        E = q * float(np.sum(self.h * gam)) + 0.5 * float(np.sum(gam * J)) - 0.5 * float(np.sum(phi * K))
        hq = q * self.h + J
        grad = hq @ phi + phi @ hq - K
        return E, 0.5 * (grad + grad.T)


def _line_search(E, x, grad, trial, opts: MinimizeOptions, t_init: float):
    """Monotone backtracking: Armijo fast path at t_init, otherwise back
    off to the first strict decrease and keep shrinking while it improves.

    Returns (candidate, accepted_t) or None when no descent step exists.
    A plain first-pass Armijo rule is not enough here: on the active set
    the capped slope can demand decreases no step provides, and the first
    step that passes may be a microscopic one far below better candidates.
    """
    t = t_init
    cand = trial(t)
    pred = float(np.sum(grad * (cand[1] - x)))
    if cand[0] < E and cand[0] <= E + opts.armijo * pred:
        return cand, t
    while cand[0] >= E and t > _T_FLOOR:
        t *= opts.backtrack
        cand = trial(t)
    if cand[0] >= E:
        return None
    while t > _T_FLOOR:
        nxt = trial(t * opts.backtrack)
        if nxt[0] < cand[0]:
            cand = nxt
            t *= opts.backtrack
        else:
            break
    return cand, t


def _check_finite(E: float, iteration: int) -> None:
    if not np.isfinite(E):
        raise RuntimeError(f"non-finite energy encountered at iteration {iteration}")


def _pgd_sweep(obj: _GammaObjective, budget: float, lam, U, opts, max_steps, trace):
    """Projected-gradient steps on gamma; returns the accepted-step count."""
    E, grad = obj.value_grad(lam, U)
    steps = 0
    for _ in range(max_steps):
        gm = (U * lam) @ U.T

        def trial(t):
            lam2, U2 = np.linalg.eigh(gm - t * grad)
            lam2 = project_occupations(lam2, budget)
            E2, grad2 = obj.value_grad(lam2, U2)
            return E2, (U2 * lam2) @ U2.T, grad2, lam2, U2

        hit = _line_search(E, gm, grad, trial, opts, opts.step0)
        if hit is None:
            break
        (E2, gm2, grad2, lam2, U2), _t = hit
        _check_finite(E2, steps)
        step_norm = float(np.linalg.norm(gm2 - gm))
        dE = abs(E2 - E)
        lam, U, E, grad = lam2, U2, E2, grad2
        trace.append(E)
        steps += 1
        if step_norm <= opts.tol_step and dE <= opts.tol_energy * (1.0 + abs(E)):
            break
    return E, lam, U, steps


def _occupation_polish(iset: IntegralSet, kind: FunctionalKind, budget, lam, U):
    """Exact occupation minimization at fixed natural orbitals.

    Substituting lam = sin(theta)^2 removes the square-root boundary
    singularities, at the price of vanishing derivatives at the box
    corners; starting points are therefore nudged inside.
    """
    q, n = iset.q, iset.n
    hU = np.diag(U.T @ iset.h @ U).copy()
    Jm = np.einsum("ijkl,ip,jp,kq,lq->pq", iset.eri, U, U, U, U, optimize=True)
    Km = np.einsum("ijkl,ip,jq,kp,lq->pq", iset.eri, U, U, U, U, optimize=True)
    hole = kind is FunctionalKind.CA
    sqrt_x = kind is FunctionalKind.MUELLER

    def value_grad(th):
        s, c = np.sin(th), np.cos(th)
        lam_t = s * s
        dlam = 2.0 * s * c
        E = q * float(hU @ lam_t) + 0.5 * q * q * float(lam_t @ Jm @ lam_t)
        gth = (q * hU + q * q * (Jm @ lam_t)) * dlam
        if sqrt_x:
            v, dv = np.abs(s), np.sign(s) * c
        else:
            v, dv = lam_t, dlam
        E -= 0.5 * q * float(v @ Km @ v)
        gth -= q * (Km @ v) * dv
        if hole:
            v, dv = s * c, c * c - s * s
            E -= 0.5 * q * float(v @ Km @ v)
            gth -= q * (Km @ v) * dv
        return E, gth

    cons = [
        {
            "type": "ineq",
            "fun": lambda th: budget - float(np.sum(np.sin(th) ** 2)),
            "jac": lambda th: -np.sin(2.0 * th),
        }
    ]
    best_E, best_lam = np.inf, lam
    th_cur = np.arcsin(np.sqrt(np.clip(lam, 0.0, 1.0)))
    uniform = np.full(n, np.arcsin(np.sqrt(min(1.0 - 1e-12, budget / n))))
    for th0 in (np.clip(th_cur, 1e-3, np.pi / 2 - 1e-3), uniform):
        res = _scipy_minimize(
            value_grad,
            th0,
            jac=True,
            method="SLSQP",
            bounds=[(0.0, np.pi / 2)] * n,
            constraints=cons,
            options={"maxiter": 500, "ftol": 1e-16},
        )
        lam_new = np.clip(np.sin(res.x) ** 2, 0.0, 1.0)
        if lam_new.sum() > budget:
            lam_new = project_occupations(lam_new, budget)
        E_new, _ = value_grad(np.arcsin(np.sqrt(lam_new)))
        if E_new < best_E:
            best_E, best_lam = E_new, lam_new
    return best_lam


def _minimize_gamma(iset, kind, budget, gamma0, opts):
    """PGD sweeps alternated with occupation polish (HF and CA path)."""
    obj = _GammaObjective(iset, kind)
    lam, U = np.linalg.eigh(gamma0)
    lam = project_occupations(lam, budget)
    E, _ = obj.value_grad(lam, U)
    trace = [E]
    total_steps = 0
    converged = False
    E_outer = None
    for _ in range(_OUTER_ROUNDS):
        room = opts.max_iter - total_steps
        if room <= 0:
            break
        E, lam, U, steps = _pgd_sweep(obj, budget, lam, U, opts, min(_SWEEP_ITERS, room), trace)
        total_steps += steps
        lam_p = _occupation_polish(iset, kind, budget, lam, U)
        E_p, _ = obj.value_grad(lam_p, U)
        if E_p < E:
            lam, E = lam_p, E_p
            trace.append(E)
        if E_outer is not None and abs(E_outer - E) <= opts.tol_energy * (1.0 + abs(E)):
            converged = True
            break
        E_outer = E
    return E, lam, U, total_steps, converged, trace


def _minimize_sqrt(iset, budget, gamma0, opts):
    """Barzilai-Borwein projected gradient on phi = sqrt(gamma) (Mueller path)."""
    obj = _SqrtObjective(iset)
    lam, U = np.linalg.eigh(gamma0)
    x = project_sqrt_occupations(np.sqrt(np.clip(project_occupations(lam, budget), 0.0, 1.0)), budget)
    phi = (U * x) @ U.T
    E, grad = obj.value_grad(phi)
    trace = [E]
    t_bb = opts.step0
    converged = False
    it = 0
    for it in range(opts.max_iter):
        def trial(t):
            x2, U2 = np.linalg.eigh(phi - t * grad)
            x2 = project_sqrt_occupations(x2, budget)
            phi2 = (U2 * x2) @ U2.T
            E2, grad2 = obj.value_grad(phi2)
            return E2, phi2, grad2

        hit = _line_search(E, phi, grad, trial, opts, t_bb)
        if hit is None:
            break
        (E2, phi2, grad2), _t = hit
        _check_finite(E2, it)
        s = phi2 - phi
        y = grad2 - grad
        sy = float(np.sum(s * y))
        t_bb = min(_BB_CAP, max(1e-10, float(np.sum(s * s)) / sy)) if sy > 0 else opts.step0
        step_norm = float(np.linalg.norm(s))
        dE = abs(E2 - E)
        phi, E, grad = phi2, E2, grad2
        trace.append(E)
        if step_norm <= opts.tol_step and dE <= opts.tol_energy * (1.0 + abs(E)):
            converged = True
            break
    lam_phi, U = np.linalg.eigh(phi)
    lam = np.clip(lam_phi, 0.0, 1.0) ** 2
    return E, lam, U, it + 1, converged, trace


def _coerce_kind(kind) -> FunctionalKind:
    if isinstance(kind, FunctionalKind):
        return kind
    return FunctionalKind(str(kind).lower())


def minimize(iset: IntegralSet, N: float, kind, opts: MinimizeOptions | None = None) -> MinimizeResult:
    """Minimize the chosen functional over density matrices with
    spectrum in [0,1] and particle number q tr(gamma) <= N.

    Runs the deterministic aufbau start plus ``opts.starts`` seeded random
    starts and returns the best.  ``N`` counts particles; with q = 2 it
    must be an even integer (the spin-restricted spatial budget is N/q).
    """
    kind = _coerce_kind(kind)
    opts = opts or MinimizeOptions()
    if not 0 < N <= iset.q * iset.n:
        raise ValueError(f"particle budget N={N} outside (0, q*n] = (0, {iset.q * iset.n}]")
    if iset.q == 2 and (abs(N - round(N)) > 1e-9 or round(N) % 2 != 0):
        raise ValueError(f"q=2 minimization requires an even integer N, got {N}")
    budget = N / iset.q

    w, V = np.linalg.eigh(iset.h)
    starts = [DensityMatrix.from_spectrum(aufbau_occupations(iset.n, budget), V)]
    starts += [random_feasible(iset.n, budget, opts.seed + k) for k in range(opts.starts)]

    best = None
    start_energies = []
    for g0 in starts:
        if kind is FunctionalKind.MUELLER:
            E, lam, U, iters, conv, trace = _minimize_sqrt(iset, budget, g0.m, opts)
        else:
            E, lam, U, iters, conv, trace = _minimize_gamma(iset, kind, budget, g0.m, opts)
        start_energies.append(E)
        if best is None or E < best[0]:
            best = (E, lam, U, iters, conv, trace)
    E, lam, U, iters, conv, trace = best
    gamma = DensityMatrix.from_spectrum(np.clip(lam, 0.0, 1.0), U)
    breakdown = functional_energy(iset, gamma, kind)
    occupations = np.sort(gamma.eigenvalues)[::-1]
    active = abs(iset.q * gamma.trace() - N) <= 1e-8
    return MinimizeResult(
        gamma=gamma,
        energy=breakdown,
        iterations=iters,
        converged=conv,
        energy_trace=trace,
        occupations=occupations,
        active_trace=active,
        start_energies=start_energies,
    )


@dataclass(frozen=True)
class ZscanRow:
    """One zscan record; CSV order is Z,kind,energy_ha,converged,trace,iterations."""

    Z: int
    kind: str
    energy_ha: float
    converged: bool
    trace: float
    iterations: int

    def as_csv_fields(self) -> list[str]:
        return [
            str(self.Z),
            self.kind,
            repr(self.energy_ha),
            "true" if self.converged else "false",
            repr(self.trace),
            str(self.iterations),
        ]


def zscan(kinds, z_values, basis: BasisSpec, opts: MinimizeOptions | None = None) -> list[ZscanRow]:
    """Neutral-atom scan: minimize each requested functional at N = Z.

    The basis template is reused with its nuclear charge replaced per row.
    Rows are ordered by Z, then by the order of ``kinds``.
    """
    kinds = [_coerce_kind(k) for k in kinds]
    rows = []
    for Z in z_values:
        iset = build_even_tempered(dataclasses.replace(basis, Z=float(Z)))
        for kind in kinds:
            res = minimize(iset, float(Z), kind, opts)
            rows.append(
                ZscanRow(
                    Z=int(Z),
                    kind=kind.value,
                    energy_ha=res.energy.total,
                    converged=res.converged,
                    trace=iset.q * res.gamma.trace(),
                    iterations=res.iterations,
                )
            )
    return rows
