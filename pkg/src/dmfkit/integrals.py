"""Even-tempered s-Gaussian bases and their one- and two-electron integrals.

All integrals are over concentric (single-center) normalized s-type
Gaussians, for which every matrix element is closed-form:

    phi_i(r) = (2 a_i / pi)^(3/4) exp(-a_i r^2)

    S_ij      = (4 a_i a_j / (a_i + a_j)^2)^(3/4)
    T_ij      = 3 a_i a_j / (a_i + a_j) * S_ij
    <i|1/r|j> = 2 (4 a_i a_j)^(3/4) / (sqrt(pi) (a_i + a_j))
    (ij|kl)   = 2 (16 a_i a_j a_k a_l)^(3/4) / (sqrt(pi) p q sqrt(p+q)),
                p = a_i + a_j,  q = a_k + a_l   (chemists' notation)

The returned integrals are expressed in the symmetrically orthonormalized
basis X = S^(-1/2), so density matrices carry the clean spectral
constraints 0 <= gamma <= 1.  Hartree atomic units throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BasisSpec",
    "IntegralSet",
    "LinearDependenceError",
    "InterchangeFormatError",
    "build_even_tempered",
    "save_interchange",
    "load_interchange",
]

#: orthonormalization is refused above this overlap condition number
COND_LIMIT = 1e10


class LinearDependenceError(ValueError):
    """Raised when the primitive overlap matrix is numerically singular."""


class InterchangeFormatError(ValueError):
    """Raised on malformed interchange files; message carries the line number."""


@dataclass(frozen=True)
class BasisSpec:
    """Parameters of an even-tempered s-Gaussian basis for one atom.

    Exponents are ``alpha0 * beta**i`` for ``i = 0 .. count-1`` (bohr^-2).
    ``q`` is the number of spin states per particle (1 or 2).
    """

    count: int
    alpha0: float
    beta: float
    Z: float = 0.0
    q: int = 1

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")
        if not self.alpha0 > 0:
            raise ValueError(f"alpha0 must be positive, got {self.alpha0}")
        if not self.beta > 1:
            raise ValueError(f"beta must exceed 1, got {self.beta}")
        if self.Z < 0:
            raise ValueError(f"Z must be nonnegative, got {self.Z}")
        if self.q not in (1, 2):
            raise ValueError(f"q must be 1 or 2, got {self.q}")

    @property
    def exponents(self) -> np.ndarray:
        return self.alpha0 * self.beta ** np.arange(self.count, dtype=float)


@dataclass(eq=False)
class IntegralSet:
    """One-body matrix and two-electron tensor in an orthonormal basis.

    ``h`` is the matrix of (p^2/2 - Z/|x|), ``eri`` holds (ij|kl) in
    chemists' notation.  Both carry Hartree units.  Instances are treated
    as immutable after construction.
    """

    n: int
    h: np.ndarray
    eri: np.ndarray
    Z: float
    q: int
    provenance: str = ""
    # contraction cache; init=False so dataclasses.replace() always resets it
    _exchange_matrix: np.ndarray | None = field(default=None, repr=False, init=False, compare=False)

    def __post_init__(self) -> None:
        # shared read-only across threads; copy before mutating
        self.h = np.asarray(self.h, dtype=float)
        self.eri = np.asarray(self.eri, dtype=float)
        self.h.setflags(write=False)
        self.eri.setflags(write=False)

    def pair_matrix(self) -> np.ndarray:
        """The n^2 x n^2 matrix M[(ij),(kl)] = (ij|kl).

        Positive semidefiniteness of this matrix is the discrete image of
        the positivity of the Coulomb kernel; it is what makes both the
        direct and exchange quadratic forms nonnegative.
        """
        return self.eri.reshape(self.n * self.n, self.n * self.n)

    def exchange_matrix(self) -> np.ndarray:
        """Reindexed tensor E[(ij),(kl)] = (ik|jl), cached for fast contraction."""
        if self._exchange_matrix is None:
            n = self.n
            self._exchange_matrix = np.ascontiguousarray(
                self.eri.transpose(0, 2, 1, 3).reshape(n * n, n * n)
            )
        return self._exchange_matrix

    def validate(self, psd_tol: float = 1e-10, sym_tol: float = 1e-12) -> None:
        """Check the structural invariants; raises ValueError on violation."""
        h, eri, n = self.h, self.eri, self.n
        if h.shape != (n, n) or eri.shape != (n, n, n, n):
            raise ValueError("inconsistent array shapes")
        if np.max(np.abs(h - h.T)) > sym_tol:
            raise ValueError("one-body matrix is not symmetric")
        for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
            if np.max(np.abs(eri - eri.transpose(perm))) > sym_tol:
                raise ValueError(f"eri lacks 8-fold symmetry under {perm}")
        w = np.linalg.eigvalsh(self.pair_matrix())
        if w[0] < -psd_tol:
            raise ValueError(f"eri pair matrix indefinite: min eigenvalue {w[0]:.3e}")


def _primitive_integrals(spec: BasisSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    a = spec.exponents
    ai, aj = a[:, None], a[None, :]
    S = (4.0 * ai * aj / (ai + aj) ** 2) ** 0.75
    T = 3.0 * ai * aj / (ai + aj) * S
    V = 2.0 * (4.0 * ai * aj) ** 0.75 / (np.sqrt(np.pi) * (ai + aj))
    p = ai + aj
    prod = np.einsum("i,j,k,l->ijkl", a, a, a, a)
    pq = p[:, :, None, None] * p[None, None, :, :]
    psum = p[:, :, None, None] + p[None, None, :, :]
    eri = 2.0 * (16.0 * prod) ** 0.75 / (np.sqrt(np.pi) * pq * np.sqrt(psum))
    return S, T - spec.Z * V, eri


def _symmetrize_eri(eri: np.ndarray) -> np.ndarray:
    # scrub transform round-off so the 8-fold invariant holds to 1e-12;
    # averaging over the symmetry group preserves pair-matrix PSD-ness
    eri = 0.5 * (eri + eri.transpose(1, 0, 2, 3))
    eri = 0.5 * (eri + eri.transpose(0, 1, 3, 2))
    eri = 0.5 * (eri + eri.transpose(2, 3, 0, 1))
    return eri


def build_even_tempered(spec: BasisSpec) -> IntegralSet:
    """Analytic integrals for ``spec``, symmetrically orthonormalized.

    Raises :class:`LinearDependenceError` when the overlap condition
    number exceeds ``COND_LIMIT``.
    """
    S, h_prim, eri_prim = _primitive_integrals(spec)
    s, U = np.linalg.eigh(S)
    cond = s[-1] / s[0] if s[0] > 0 else np.inf
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise LinearDependenceError(
            f"overlap condition number {cond:.3e} exceeds {COND_LIMIT:.0e}; "
            f"basis (count={spec.count}, alpha0={spec.alpha0}, beta={spec.beta}) "
            "is numerically linearly dependent"
        )
    X = (U * s**-0.5) @ U.T
    h = X @ h_prim @ X
    h = 0.5 * (h + h.T)
    eri = eri_prim
    for _ in range(4):
        # contracting the leading axis cycles the index order back after 4 passes
        eri = np.tensordot(eri, X, axes=([0], [0]))
    eri = _symmetrize_eri(np.ascontiguousarray(eri))
    provenance = (
        f"even-tempered count={spec.count} alpha0={spec.alpha0!r} "
        f"beta={spec.beta!r} Z={spec.Z!r} q={spec.q}"
    )
    return IntegralSet(n=spec.count, h=h, eri=eri, Z=spec.Z, q=spec.q, provenance=provenance)


def _canonical_pairs(n: int):
    for i in range(n):
        for j in range(i, n):
            yield i, j


def _canonical_quads(n: int):
    for i in range(n):
        for j in range(i, n):
            for k in range(n):
                for l in range(k, n):
                    if (i, j) <= (k, l):
                        yield i, j, k, l


def save_interchange(iset: IntegralSet, path: str, n_hint: int | None = None) -> None:
    """Write ``iset`` in the text interchange format.

    Only canonical index tuples under the 8-fold symmetry are stored, in
    lexicographic order, so two saves of the same set are byte-identical.
    """
    if n_hint is None:
        n_hint = int(round(iset.Z))
    lines = [f"{iset.n} {iset.Z!r} {iset.q} {n_hint}", "H"]
    for i, j in _canonical_pairs(iset.n):
        lines.append(f"{i + 1} {j + 1} {iset.h[i, j]:.16e}")
    lines.append("ERI")
    for i, j, k, l in _canonical_quads(iset.n):
        lines.append(f"{i + 1} {j + 1} {k + 1} {l + 1} {iset.eri[i, j, k, l]:.16e}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _set_eri(eri: np.ndarray, i: int, j: int, k: int, l: int, v: float) -> None:
    for a, b in ((i, j), (j, i)):
        for c, d in ((k, l), (l, k)):
            eri[a, b, c, d] = v
            eri[c, d, a, b] = v


def load_interchange(path: str) -> IntegralSet:
    """Read an interchange file; symmetries are completed from the stored
    unique elements and absent entries default to zero."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.readlines()

    def fail(lineno: int, msg: str):
        raise InterchangeFormatError(f"{path}:{lineno}: {msg}")

    header = None
    section = None
    h = eri = None
    n = 0
    Z = 0.0
    q = 1
    n_hint = 0
    for lineno, line in enumerate(raw, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if header is None:
            parts = text.split()
            if len(parts) != 4:
                fail(lineno, f"expected header 'n Z q N_hint', got {text!r}")
            try:
                n, Z, q, n_hint = int(parts[0]), float(parts[1]), int(parts[2]), int(parts[3])
            except ValueError:
                fail(lineno, f"malformed header {text!r}")
            if n < 1:
                fail(lineno, f"basis dimension must be positive, got {n}")
            if q not in (1, 2):
                fail(lineno, f"q must be 1 or 2, got {q}")
            header = (n, Z, q, n_hint)
            h = np.zeros((n, n))
            eri = np.zeros((n, n, n, n))
            continue
        if text == "H":
            section = "H"
            continue
        if text == "ERI":
            section = "ERI"
            continue
        if section is None:
            fail(lineno, f"integral line {text!r} before any 'H'/'ERI' section marker")
        parts = text.split()
        want = 3 if section == "H" else 5
        if len(parts) != want:
            fail(lineno, f"expected {want} fields in {section} section, got {len(parts)}")
        try:
            idx = [int(p) for p in parts[:-1]]
            v = float(parts[-1])
        except ValueError:
            fail(lineno, f"malformed {section} line {text!r}")
        if any(not 1 <= p <= n for p in idx):
            fail(lineno, f"index out of range 1..{n} in {text!r}")
        if section == "H":
            i, j = idx[0] - 1, idx[1] - 1
            h[i, j] = h[j, i] = v
        else:
            i, j, k, l = (p - 1 for p in idx)
            _set_eri(eri, i, j, k, l, v)
    if header is None:
        raise InterchangeFormatError(f"{path}: missing header line")
    return IntegralSet(n=n, h=h, eri=eri, Z=Z, q=q, provenance=f"file {path} (N_hint={n_hint})")
