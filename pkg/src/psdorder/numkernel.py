"""Numerical kernel for real symmetric matrices.

Conventions shared by everything built on top of this module:

- raw input is symmetrized by averaging with its transpose,
- eigenvalues are reported in descending order,
- the first nonzero component of each eigenvector is made positive, so a
  factorization of the same input is reproducible run to run,
- rank decisions compare eigenvalue magnitudes against one relative cutoff
  taken from ToleranceConfig, and every routine accepts the same config
  object so a caller's tolerance choices apply uniformly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonConvergence, NotPositiveSemidefinite
from .rng import normal_matrix
from .tolerances import DEFAULT_TOL, JACOBI_SWEEP_BUDGET, ToleranceConfig

# A unit eigenvector component below this is treated as zero when fixing signs.
_SIGN_EPS = 1e-12


def _coerce_square(data) -> np.ndarray:
    """Validate and copy raw input into a float square array."""
    if isinstance(data, SymMatrix):
        return np.array(data.a, dtype=float)
    a = np.array(data, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def maxabs(m) -> float:
    """Largest entry magnitude; zero for an empty array."""
    m = np.asarray(m, dtype=float)
    return float(np.max(np.abs(m))) if m.size else 0.0


class SymMatrix:
    """A real symmetric matrix, stored immutably.

    Construction symmetrizes by averaging, so callers may pass data that is
    symmetric only up to roundoff.  How far the input was from symmetric is
    kept in `asymmetry` for callers that want to warn on sloppy data.
    """

    def __init__(self, data):
        a = _coerce_square(data)
        self.asymmetry = maxabs(a - a.T)
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        self._a = a

    @property
    def a(self) -> np.ndarray:
        """The underlying read-only ndarray."""
        return self._a

    @property
    def n(self) -> int:
        return self._a.shape[0]

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n})"


class PsdMatrix(SymMatrix):
    """A symmetric matrix verified positive semidefinite at construction.

    The check is tolerance-based: the minimum eigenvalue must be at least
    -psd_tol * max(1, spectral radius).  The computed minimum is kept as
    `min_eig_witness`.
    """

    def __init__(self, data, tol: ToleranceConfig = DEFAULT_TOL):
        super().__init__(data)
        check = is_psd(self, tol)
        if not check.ok:
            raise NotPositiveSemidefinite(
                f"minimum eigenvalue {check.min_eig:.6g} is below "
                f"-{check.threshold:.6g}",
                min_eig=check.min_eig,
            )
        self.min_eig_witness = check.min_eig


@dataclass(frozen=True)
class EigDecomposition:
    """Spectral factorization A = Q diag(values) Q^T.

    `values` are descending; `vectors` holds the matching orthonormal
    eigenvectors as columns, sign-fixed as described in the module docstring.
    """

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        q = self.vectors
        return (q * self.values) @ q.T


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal columns spanning a subspace of R^n."""

    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def n(self) -> int:
        return self.basis.shape[0]


@dataclass(frozen=True)
class PsdCheck:
    """Outcome of a PSD test.

    On failure `witness` is a unit vector with witness^T A witness < 0 (the
    eigenvector of the most negative eigenvalue); on success it is None.
    """

    ok: bool
    min_eig: float
    threshold: float
    witness: np.ndarray | None = None


def _canonical_order(values: np.ndarray, vectors: np.ndarray) -> EigDecomposition:
    """Sort descending and apply the deterministic sign convention."""
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        nz = np.flatnonzero(np.abs(col) > _SIGN_EPS)
        if nz.size and col[nz[0]] < 0:
            vectors[:, j] = -col
    values.setflags(write=False)
    vectors.setflags(write=False)
    return EigDecomposition(values=values, vectors=vectors)


def _jacobi_eig(a: np.ndarray, tol: ToleranceConfig):
    """Cyclic Jacobi sweeps; returns raw (values, vectors) before ordering."""
    n = a.shape[0]
    a = a.copy()
    q = np.eye(n)
    target = tol.eig_tol * max(1.0, float(np.linalg.norm(a, "fro")))
    for sweep in range(JACOBI_SWEEP_BUDGET + 1):
        off = float(np.linalg.norm(a - np.diag(np.diag(a)), "fro"))
        if off <= target:
            return np.diag(a).copy(), q
        if sweep == JACOBI_SWEEP_BUDGET:
            raise NonConvergence(
                f"Jacobi off-diagonal norm {off:.3e} above {target:.3e} "
                f"after {JACOBI_SWEEP_BUDGET} sweeps"
            )
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = a[p, r]
                # Rotation angle would underflow; the entry is already dead.
                if abs(apr) <= 1e-36 * max(1.0, abs(a[p, p]), abs(a[r, r])):
                    a[p, r] = a[r, p] = 0.0
                    continue
                theta = (a[r, r] - a[p, p]) / (2.0 * apr)
                t = np.sign(theta) if theta != 0 else 1.0
                t = t / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                col_p, col_r = a[:, p].copy(), a[:, r].copy()
                a[:, p] = c * col_p - s * col_r
                a[:, r] = s * col_p + c * col_r
                row_p, row_r = a[p, :].copy(), a[r, :].copy()
                a[p, :] = c * row_p - s * row_r
                a[r, :] = s * row_p + c * row_r
                a[p, r] = a[r, p] = 0.0
                q_p, q_r = q[:, p].copy(), q[:, r].copy()
                q[:, p] = c * q_p - s * q_r
                q[:, r] = s * q_p + c * q_r
    raise AssertionError("unreachable")


def sym_eig(a, tol: ToleranceConfig = DEFAULT_TOL, backend: str = "lapack") -> EigDecomposition:
    """Eigendecomposition of a symmetric matrix.

    backend "lapack" uses the platform symmetric eigensolver; "jacobi" runs
    the cyclic Jacobi iteration with a fixed sweep budget.  Both feed the
    same ordering and sign post-processing, so results agree to roundoff.
    """
    sym = a if isinstance(a, SymMatrix) else SymMatrix(a)
    if backend == "lapack":
        try:
            values, vectors = np.linalg.eigh(sym.a)
        except np.linalg.LinAlgError as exc:
            raise NonConvergence(f"eigensolver failed: {exc}") from exc
    elif backend == "jacobi":
        values, vectors = _jacobi_eig(sym.a, tol)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return _canonical_order(np.asarray(values, dtype=float), np.asarray(vectors, dtype=float))


def numerical_rank(a, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Rank of a symmetric matrix by eigenvalue magnitude.

    Eigenvalues with |lambda| <= cutoff count as zero, where the cutoff is
    rank_rel_tol * max|lambda| (default rank_rel_tol: n * machine epsilon).
    """
    eig = sym_eig(a, tol)
    mags = np.abs(eig.values)
    mx = float(mags.max()) if mags.size else 0.0
    if mx == 0.0:
        return 0
    cutoff = tol.rank_cutoff(len(eig.values), mx)
    return int(np.count_nonzero(mags > cutoff))


def rect_rank(m, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Rank of an arbitrary matrix by singular value, with the same relative
    cutoff convention as numerical_rank (n taken as the larger dimension)."""
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    mx = float(s[0])
    if mx == 0.0:
        return 0
    cutoff = tol.rank_cutoff(max(m.shape), mx)
    return int(np.count_nonzero(s > cutoff))


def is_psd(a, tol: ToleranceConfig = DEFAULT_TOL) -> PsdCheck:
    """Tolerance-based PSD test with an eigenvalue (and, on failure, an
    eigenvector) witness."""
    eig = sym_eig(a, tol)
    if eig.values.size == 0:
        return PsdCheck(ok=True, min_eig=0.0, threshold=tol.psd_tol)
    min_eig = float(eig.values[-1])
    threshold = tol.psd_tol * max(1.0, float(np.abs(eig.values).max()))
    ok = min_eig >= -threshold
    witness = None if ok else eig.vectors[:, -1]
    return PsdCheck(ok=ok, min_eig=min_eig, threshold=threshold, witness=witness)


def pinv(a, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a symmetric matrix via its spectrum.

    Eigenvalues under the rank cutoff are dropped rather than inverted, so
    the result is the pseudoinverse of the nearest matrix of the detected
    rank.
    """
    eig = sym_eig(a, tol)
    mags = np.abs(eig.values)
    mx = float(mags.max()) if mags.size else 0.0
    if mx == 0.0:
        return np.zeros_like(eig.vectors)
    cutoff = tol.rank_cutoff(len(eig.values), mx)
    inv = np.where(mags > cutoff, 1.0 / np.where(mags > cutoff, eig.values, 1.0), 0.0)
    q = eig.vectors
    return (q * inv) @ q.T


def inner_ginverse(a, seed: int = 0, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """A member of the inner-inverse family {G : A G A = A}.

    The family is parametrized as G = A+ + V - A+ A V A A+ with V free;
    seed = 0 picks V = 0 and returns the pseudoinverse itself, any other
    seed draws V from the deterministic stream keyed by it.  The defining
    identity is re-verified before returning.
    """
    sym = a if isinstance(a, SymMatrix) else SymMatrix(a)
    plus = pinv(sym, tol)
    if seed == 0:
        g = plus
    else:
        v = normal_matrix(seed, sym.n, sym.n)
        g = plus + v - plus @ sym.a @ v @ sym.a @ plus
    residual = maxabs(sym.a @ g @ sym.a - sym.a)
    scale = max(1.0, maxabs(sym.a)) * max(1.0, maxabs(g))
    if residual > tol.recon_tol * scale:
        raise NonConvergence(
            f"inner-inverse identity residual {residual:.3e} exceeds budget"
        )
    return g


def image_basis(a, tol: ToleranceConfig = DEFAULT_TOL) -> SubspaceBasis:
    """Orthonormal basis of the column space of a symmetric matrix, taken
    from the eigenvectors whose eigenvalues clear the rank cutoff."""
    eig = sym_eig(a, tol)
    mags = np.abs(eig.values)
    mx = float(mags.max()) if mags.size else 0.0
    if mx == 0.0:
        keep = np.zeros(len(eig.values), dtype=bool)
    else:
        keep = mags > tol.rank_cutoff(len(eig.values), mx)
    return SubspaceBasis(basis=eig.vectors[:, keep])


def _basis_array(u) -> np.ndarray:
    return u.basis if isinstance(u, SubspaceBasis) else np.asarray(u, dtype=float)


def subspace_leq(u, w, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Whether span(u) is contained in span(w).

    Both arguments are matrices with orthonormal columns (or SubspaceBasis).
    Containment holds when every basis vector of u, after removing its
    projection onto span(w), has norm at most recon_tol.
    """
    ub, wb = _basis_array(u), _basis_array(w)
    if ub.shape[0] != wb.shape[0]:
        raise DimensionMismatch(
            f"bases live in different spaces: {ub.shape[0]} vs {wb.shape[0]}"
        )
    if ub.shape[1] == 0:
        return True
    residual = ub - wb @ (wb.T @ ub)
    norms = np.linalg.norm(residual, axis=0)
    return bool(np.all(norms <= tol.recon_tol))


def pos_neg_split(a, tol: ToleranceConfig = DEFAULT_TOL):
    """Split A = P - N with P, N both PSD and P N = 0.

    P collects the eigendirections with eigenvalue above the rank cutoff, N
    those below its negative; near-zero eigenvalues contribute to neither.
    """
    eig = sym_eig(a, tol)
    mags = np.abs(eig.values)
    mx = float(mags.max()) if mags.size else 0.0
    cutoff = tol.rank_cutoff(len(eig.values), mx) if mx > 0 else 0.0
    pos = np.where(eig.values > cutoff, eig.values, 0.0)
    neg = np.where(eig.values < -cutoff, -eig.values, 0.0)
    q = eig.vectors
    p_part = PsdMatrix((q * pos) @ q.T, tol)
    n_part = PsdMatrix((q * neg) @ q.T, tol)
    return p_part, n_part


def projector_onto(u, tol: ToleranceConfig = DEFAULT_TOL) -> PsdMatrix:
    """Orthogonal projector onto span(u), for u with orthonormal columns."""
    b = _basis_array(u)
    return PsdMatrix(b @ b.T, tol)
