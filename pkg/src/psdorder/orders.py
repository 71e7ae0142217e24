"""Partial-order checks for symmetric matrices.

Three families are covered: the PSD (Loewner) order A <= B iff B - A is
positive semidefinite, the rank-subtractivity (minus) order
rank(B - A) = rank(B) - rank(A), and the star family, which on symmetric
arguments reduces to the identity A^2 = A B plus (for the one-sided
variants) an image containment.

Every check returns an OrderVerdict carrying a machine-checkable
certificate: an eigenvalue witness, a rank triple, residual norms, or an
explicit inner inverse, depending on the route taken.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DimensionMismatch
from .numkernel import (
    SymMatrix,
    image_basis,
    maxabs,
    numerical_rank,
    pinv,
    rect_rank,
    subspace_leq,
    sym_eig,
)
from .tolerances import DEFAULT_TOL, ToleranceConfig


class Relation(str, Enum):
    LOWNER = "lowner"
    MINUS = "minus"
    STAR = "star"
    LEFT_STAR = "left-star"
    RIGHT_STAR = "right-star"


class MinusMethod(str, Enum):
    RANK = "rank"
    IMAGE = "image"
    GINV = "ginv"


@dataclass(frozen=True)
class OrderVerdict:
    """Outcome of an order check.

    `detail` refines the boolean: "equal", "strictly less",
    "strictly greater" (the reverse comparison holds instead), or
    "incomparable".
    """

    holds: bool
    relation: str
    certificate: dict = field(default_factory=dict)
    detail: str = ""


def _pair(a, b):
    sa = a if isinstance(a, SymMatrix) else SymMatrix(a)
    sb = b if isinstance(b, SymMatrix) else SymMatrix(b)
    if sa.n != sb.n:
        raise DimensionMismatch(f"size mismatch: {sa.n} vs {sb.n}")
    return sa, sb


def matrices_equal(a, b, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Equality up to the reconstruction tolerance, relative to the larger
    of the two entry scales (floored at 1)."""
    sa, sb = _pair(a, b)
    scale = max(1.0, maxabs(sa.a), maxabs(sb.a))
    return maxabs(sb.a - sa.a) <= tol.recon_tol * scale


def _detail(holds: bool, equal: bool, reverse_holds: bool) -> str:
    if equal:
        return "equal"
    if holds:
        return "strictly less"
    if reverse_holds:
        return "strictly greater"
    return "incomparable"


def _psd_witness(diff: np.ndarray, tol: ToleranceConfig):
    eig = sym_eig(diff, tol)
    if eig.values.size == 0:
        return True, 0.0, tol.psd_tol, None
    min_eig = float(eig.values[-1])
    threshold = tol.psd_tol * max(1.0, float(np.abs(eig.values).max()))
    ok = min_eig >= -threshold
    return ok, min_eig, threshold, (None if ok else eig.vectors[:, -1])


def lowner_leq(a, b, tol: ToleranceConfig = DEFAULT_TOL) -> OrderVerdict:
    """A <= B in the PSD sense: is B - A positive semidefinite?

    The certificate records the smallest eigenvalue of the difference and
    the threshold it was held against; on failure it also carries a unit
    vector x with x^T (B - A) x < 0.
    """
    sa, sb = _pair(a, b)
    diff = sb.a - sa.a
    holds, min_eig, threshold, witness = _psd_witness(diff, tol)
    equal = matrices_equal(sa, sb, tol)
    reverse = False
    if not holds:
        reverse = _psd_witness(-diff, tol)[0]
    return OrderVerdict(
        holds=holds,
        relation=Relation.LOWNER.value,
        certificate={"min_eig": min_eig, "threshold": threshold, "witness": witness},
        detail=_detail(holds, equal, reverse),
    )


def _shared_rank_triple(sa: SymMatrix, sb: SymMatrix, tol: ToleranceConfig):
    """Ranks of A, B, B - A counted against one shared cutoff.

    Using a single cutoff (from the largest of the three spectral radii)
    keeps the three counts consistent with each other, which is what the
    subtractivity equation needs.
    """
    diff = sb.a - sa.a
    eigs = [sym_eig(m, tol) for m in (sa.a, sb.a, diff)]
    radius = max(
        (float(np.abs(e.values).max()) if e.values.size else 0.0) for e in eigs
    )
    if radius == 0.0:
        return 0, 0, 0, 0.0
    cutoff = tol.rank_cutoff(sa.n, radius)
    r_a, r_b, r_d = (int(np.count_nonzero(np.abs(e.values) > cutoff)) for e in eigs)
    return r_a, r_b, r_d, cutoff


def _minus_by_rank(sa, sb, tol):
    r_a, r_b, r_d, cutoff = _shared_rank_triple(sa, sb, tol)
    holds = r_d == r_b - r_a
    cert = {"rank_a": r_a, "rank_b": r_b, "rank_diff": r_d, "cutoff": cutoff}
    return holds, cert


def _minus_by_image(sa, sb, tol):
    """Im B = Im A (+) Im(B - A), tested through subspace geometry.

    The sum is direct when the stacked bases of A and B - A have full
    column rank; it fills Im B when both summands sit inside Im B (a
    projection-residual test, far more robust than rank-deciding a stack
    of three eigenbases) and the dimensions add up.
    """
    base_a = image_basis(sa, tol)
    base_b = image_basis(sb, tol)
    base_c = image_basis(SymMatrix(sb.a - sa.a), tol)
    dim_a, dim_b, dim_c = base_a.dim, base_b.dim, base_c.dim
    sum_rank = rect_rank(np.hstack([base_a.basis, base_c.basis]), tol)
    direct = sum_rank == dim_a + dim_c
    contained = subspace_leq(base_a, base_b, tol) and subspace_leq(base_c, base_b, tol)
    holds = direct and contained and dim_a + dim_c == dim_b
    cert = {
        "dim_a": dim_a,
        "dim_b": dim_b,
        "dim_diff": dim_c,
        "sum_rank": sum_rank,
        "contained": contained,
    }
    return holds, cert


def _minus_by_ginv(sa, sb, tol):
    """Constructive route: build an inner inverse G of A with G A = G B and
    A G = B G, which exists exactly when A is below B.

    G is assembled from the oblique projector onto Im A along
    Im(B - A) (+) (Im B)-perp; if the three pieces fail to decompose R^n the
    pair is not comparable and the certificate says which check failed.
    """
    n = sa.n
    diff = SymMatrix(sb.a - sa.a)
    u_a = image_basis(sa, tol).basis
    u_c = image_basis(diff, tol).basis
    eig_b = sym_eig(sb, tol)
    mags = np.abs(eig_b.values)
    radius = float(mags.max()) if mags.size else 0.0
    keep = mags > tol.rank_cutoff(n, radius) if radius > 0 else np.zeros(n, bool)
    u_perp = eig_b.vectors[:, ~keep]
    cert: dict = {
        "dim_a": u_a.shape[1],
        "dim_b": int(keep.sum()),
        "dim_diff": u_c.shape[1],
    }
    if u_a.shape[1] + u_c.shape[1] + u_perp.shape[1] != n:
        cert["reason"] = "dimension mismatch"
        return False, cert
    m = np.hstack([u_a, u_c, u_perp])
    sing = np.linalg.svd(m, compute_uv=False)
    cert["sigma_min"] = float(sing[-1]) if sing.size else 0.0
    if sing.size and sing[-1] <= tol.rank_cutoff(n, float(sing[0])):
        cert["reason"] = "sum not direct"
        return False, cert
    selector = np.zeros((n, n))
    selector[: u_a.shape[1], : u_a.shape[1]] = np.eye(u_a.shape[1])
    proj = m @ selector @ np.linalg.inv(m)
    g = proj.T @ pinv(sa, tol) @ proj
    scale = max(1.0, maxabs(g)) * max(1.0, maxabs(sa.a), maxabs(sb.a))
    residuals = {
        "inner": maxabs(sa.a @ g @ sa.a - sa.a),
        "left": maxabs(g @ sa.a - g @ sb.a),
        "right": maxabs(sa.a @ g - sb.a @ g),
    }
    cert["g"] = g
    cert["residuals"] = residuals
    if max(residuals.values()) > tol.recon_tol * scale:
        cert["reason"] = "identity residual"
        return False, cert
    return True, cert


_MINUS_ROUTES = {
    MinusMethod.RANK: _minus_by_rank,
    MinusMethod.IMAGE: _minus_by_image,
    MinusMethod.GINV: _minus_by_ginv,
}


def minus_leq(
    a,
    b,
    method: MinusMethod | str = MinusMethod.RANK,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> OrderVerdict:
    """A <= B in the rank-subtractivity sense.

    Three interchangeable routes: "rank" checks the defining rank equation
    with one shared cutoff, "image" checks that Im B splits as the direct
    sum of Im A and Im(B - A), and "ginv" constructs an explicit inner
    inverse witness.  They agree whenever the rank decisions are clean.
    """
    method = MinusMethod(method)
    sa, sb = _pair(a, b)
    holds, cert = _MINUS_ROUTES[method](sa, sb, tol)
    cert["method"] = method.value
    equal = matrices_equal(sa, sb, tol)
    reverse = False
    if not holds:
        reverse = _MINUS_ROUTES[method](sb, sa, tol)[0]
    return OrderVerdict(
        holds=holds,
        relation=Relation.MINUS.value,
        certificate=cert,
        detail=_detail(holds, equal, reverse),
    )


def _star_residuals(sa, sb, tol):
    """Residual of A^2 = A B and whether Im A sits inside Im B."""
    prod_aa = sa.a @ sa.a
    prod_ab = sa.a @ sb.a
    scale = max(1.0, maxabs(prod_aa), maxabs(prod_ab))
    residual = maxabs(prod_aa - prod_ab)
    contained = subspace_leq(image_basis(sa, tol), image_basis(sb, tol), tol)
    return residual, scale, contained


def star_family_leq(
    a,
    b,
    variant: Relation | str = Relation.STAR,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> OrderVerdict:
    """A below B in the star order or one of its one-sided variants.

    On symmetric arguments the two-sided condition collapses to
    A^2 = A B (its transpose gives the other identity for free); the
    one-sided variants add the image containment they are defined with.
    """
    variant = Relation(variant)
    if variant not in (Relation.STAR, Relation.LEFT_STAR, Relation.RIGHT_STAR):
        raise ValueError(f"{variant.value!r} is not a star-family relation")
    sa, sb = _pair(a, b)
    residual, scale, contained = _star_residuals(sa, sb, tol)
    identity_ok = residual <= tol.recon_tol * scale
    if variant is Relation.STAR:
        holds = identity_ok
    else:
        holds = identity_ok and contained
    equal = matrices_equal(sa, sb, tol)
    reverse = False
    if not holds:
        r_rev, s_rev, c_rev = _star_residuals(sb, sa, tol)
        rev_ok = r_rev <= tol.recon_tol * s_rev
        reverse = rev_ok if variant is Relation.STAR else (rev_ok and c_rev)
    return OrderVerdict(
        holds=holds,
        relation=variant.value,
        certificate={
            "residual": residual,
            "scale": scale,
            "image_contained": bool(contained),
        },
        detail=_detail(holds, equal, reverse),
    )


def adjacent(a, b, tol: ToleranceConfig = DEFAULT_TOL) -> OrderVerdict:
    """Whether A and B differ by a rank-one matrix."""
    sa, sb = _pair(a, b)
    r = numerical_rank(SymMatrix(sb.a - sa.a), tol)
    return OrderVerdict(
        holds=r == 1,
        relation="adjacent",
        certificate={"rank_diff": r},
        detail="adjacent" if r == 1 else f"difference has rank {r}",
    )
