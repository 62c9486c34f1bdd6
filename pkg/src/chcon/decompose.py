"""Channel-constant machinery for non-unitary qubit channels.

Unital channels split as (1-p1) * unitary + p1 * entanglement-breaking via
the tetrahedron/octahedron geometry of the diagonal Bloch form; non-unital
channels get a certified lower bound on the constant p2 from a completely
positive peel N >= q M against channels M with full-rank C_{M^dag o M}.
The channel constant is p = max(p1, p2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .channels import (
    ChannelError,
    ChoiMatrix,
    KrausChannel,
    channel_from_bloch_transfer,
    choi_distance,
    compose,
    extremality_gap,
    is_extreme_point,
    is_unitary_channel,
    kraus_to_choi,
    to_bloch_affine,
    unitary_channel,
    validate_channel,
)
from .config import DEFAULT_TOL, P2_DENOMINATOR, Tolerances
from .contraction import lambda_min_choi_of_adjoint_composition
from .sampling import random_eb_qubit_channel, random_extremal_nonunital_qubit_channel, rng_from

TETRA_CORNERS = (
    (1.0, 1.0, 1.0),
    (1.0, -1.0, -1.0),
    (-1.0, 1.0, -1.0),
    (-1.0, -1.0, 1.0),
)
CORNER_PAULIS = la.PAULIS  # corner i is conjugation by PAULIS[i]

OCTA_SLACK = 1e-9


@dataclass(frozen=True)
class UnitalDecomposition:
    p1: float
    unitary_part: KrausChannel
    eb_part: KrausChannel
    corner: int


@dataclass(frozen=True)
class ExtremalCertificate:
    """A peel certificate N >= q M with p2_lower = q^2 lmin(C_{M^dag M}) / 204800.

    ``m_extremal`` records whether M passed the extreme-point test; the
    fallback M = N is accepted for non-extremal N as well, since the
    denominator formula is sound for any channel M below N in the completely
    positive order.
    """

    q: float
    m: KrausChannel
    lambda_min_choi: float
    p2_lower: float
    m_extremal: bool
    method: str

    def __post_init__(self):
        if not 0.0 < self.q <= 1.0:
            raise ChannelError("certificate weight q must be in (0, 1]")
        expected = self.q**2 * self.lambda_min_choi / P2_DENOMINATOR
        if abs(self.p2_lower - expected) > 1e-15 + 1e-9 * abs(expected):
            raise ChannelError("certificate p2_lower is inconsistent with q and lambda_min")


@dataclass(frozen=True)
class PConstantReport:
    p1: float
    p2_lower: float
    p: float
    certification: str

    def __post_init__(self):
        if self.certification not in ("exact_p1", "certified_lower_bound"):
            raise ChannelError(f"unknown certification {self.certification!r}")
        if abs(self.p - max(self.p1, self.p2_lower)) > 1e-15:
            raise ChannelError("p must equal max(p1, p2_lower)")


# ---------------------------------------------------------------------------
# Tetrahedron geometry
# ---------------------------------------------------------------------------


def _require_unital_qubit(ch: KrausChannel, tol: Tolerances):
    if not ch.is_qubit():
        raise ChannelError("tetrahedron geometry applies to qubit channels only")
    acc = sum(k @ la.dag(k) for k in ch.kraus)
    if np.linalg.norm(acc - np.eye(2), 2) > tol.tp:
        raise ChannelError("channel is not unital within tolerance")


def barycentric_weights(lam: np.ndarray) -> np.ndarray:
    """Weights of lam over the four tetrahedron corners (sum to one)."""
    a = np.vstack([np.array(TETRA_CORNERS).T, np.ones(4)])
    b = np.concatenate([np.asarray(lam, dtype=float), [1.0]])
    return np.linalg.solve(a, b)


def tetrahedron_coords(
    ch: KrausChannel, tol: Tolerances = DEFAULT_TOL
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Diagonal form (lambda, U, V) of a unital qubit channel, with lambda
    certified to lie in the Pauli tetrahedron."""
    _require_unital_qubit(ch, tol)
    aff = to_bloch_affine(ch, tol)
    w = barycentric_weights(aff.lam)
    if w.min() < -OCTA_SLACK:
        raise ChannelError(
            f"lambda {aff.lam} escapes the tetrahedron (barycentric minimum {w.min():.3e})"
        )
    return aff.lam, aff.post_unitary, aff.pre_unitary


def octahedron_residual(lam) -> float:
    """How far |lam_x| + |lam_y| + |lam_z| exceeds 1 (<= 0 means inside)."""
    return float(np.abs(np.asarray(lam, dtype=float)).sum() - 1.0)


def corner_feasibility(lam: np.ndarray, corner: int, q: float) -> float:
    """Octahedron excess of the peeled part (lam - (1-q) v) / q at weight q."""
    v = np.array(TETRA_CORNERS[corner])
    lam = np.asarray(lam, dtype=float)
    return float(np.abs(lam - (1.0 - q) * v).sum() - q)


def corner_max_q(lam: np.ndarray, corner: int, feas_tol: float = OCTA_SLACK) -> float | None:
    """Largest q in (0, 1] with (lam - (1-q) v)/q inside the octahedron.

    The excess h(q) = sum_i |lam_i - (1-q) v_i| - q is piecewise linear and
    convex, so the feasible set {h <= feas_tol} is an interval; the upper
    endpoint is found exactly by scanning the linear segments from the right.
    Returns None when no q is feasible for this corner.
    """
    v = np.array(TETRA_CORNERS[corner])
    lam = np.asarray(lam, dtype=float)

    def h(q):
        return float(np.abs(lam - (1.0 - q) * v).sum() - q)

    knots = {0.0, 1.0}
    for li, vi in zip(lam, v):
        q_break = 1.0 - li / vi  # vi is +-1
        if 0.0 < q_break < 1.0:
            knots.add(float(q_break))
    ks = sorted(knots)
    if h(1.0) <= 0.0:
        return 1.0
    for right in range(len(ks) - 1, 0, -1):
        a, b = ks[right - 1], ks[right]
        ha, hb = h(a), h(b)
        if ha <= 0.0 < hb:
            return a + (b - a) * (0.0 - ha) / (hb - ha)
        if ha <= 0.0 and hb <= 0.0:
            return b
    # No strictly feasible segment; accept a touching minimum (within slack).
    vals = [(h(k), k) for k in ks]
    hmin, qmin = min(vals)
    if hmin <= feas_tol:
        return qmin
    return None


def unital_split(ch: KrausChannel, tol: Tolerances = DEFAULT_TOL) -> UnitalDecomposition:
    """Maximal split N = (1 - p1) * unitary + p1 * entanglement-breaking.

    The unitary part ranges over the four tetrahedron corners in the
    channel's diagonal frame; each corner contributes a one-dimensional
    feasibility problem whose largest weight is solved exactly.
    """
    _require_unital_qubit(ch, tol)
    if is_unitary_channel(ch):
        raise ChannelError("unitary channel: the entanglement-breaking weight would be zero")
    lam, u, v = tetrahedron_coords(ch, tol)
    best_q, best_corner = -1.0, -1
    for corner in range(4):
        q = corner_max_q(lam, corner)
        if q is not None and q > best_q:
            best_q, best_corner = q, corner
    if best_corner < 0 or best_q <= 0.0:
        raise ChannelError("no tetrahedron corner admits a positive split weight")
    p1 = min(best_q, 1.0)
    vtx = np.array(TETRA_CORNERS[best_corner])
    lam_b = (lam - (1.0 - p1) * vtx) / p1
    u_ch = unitary_channel(u, tol)
    v_ch = unitary_channel(v, tol)
    unitary_part = unitary_channel(u @ CORNER_PAULIS[best_corner] @ v, tol)
    diag_eb = channel_from_bloch_transfer(np.zeros(3), np.diag(lam_b), rank_tol=1e-12)
    eb_part = compose(u_ch, compose(diag_eb, v_ch))
    return UnitalDecomposition(p1=float(p1), unitary_part=unitary_part, eb_part=eb_part, corner=best_corner)


# ---------------------------------------------------------------------------
# Completely positive order and the p2 peel
# ---------------------------------------------------------------------------


def cp_order_margin(choi_n: ChoiMatrix, choi_m: ChoiMatrix, q: float) -> float:
    """Smallest eigenvalue of C_N - q C_M (non-negative means N >= q M)."""
    return la.min_eig(choi_n.matrix - q * choi_m.matrix)


def max_cp_weight(
    n: KrausChannel, m: KrausChannel, tol: Tolerances = DEFAULT_TOL, bisect_tol: float = 1e-9
) -> float:
    """Largest q in [0, 1] keeping N - q M completely positive (bisection)."""
    cn, cm = kraus_to_choi(n), kraus_to_choi(m)
    if cp_order_margin(cn, cm, 1.0) >= -tol.psd:
        return 1.0
    lo, hi = 0.0, 1.0
    if cp_order_margin(cn, cm, 0.0) < -tol.psd:
        return 0.0
    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        if cp_order_margin(cn, cm, mid) >= -tol.psd:
            lo = mid
        else:
            hi = mid
    return lo


def _certificate(q: float, m: KrausChannel, method: str) -> ExtremalCertificate:
    lam = max(lambda_min_choi_of_adjoint_composition(m), 0.0)
    return ExtremalCertificate(
        q=q,
        m=m,
        lambda_min_choi=lam,
        p2_lower=q**2 * lam / P2_DENOMINATOR,
        m_extremal=is_extreme_point(m),
        method=method,
    )


def p2_certificate(
    ch: KrausChannel,
    user_cert: tuple[float, KrausChannel] | None = None,
    candidates: int = 256,
    seed: int = 0,
    tol: Tolerances = DEFAULT_TOL,
) -> ExtremalCertificate:
    """Certified lower bound on the non-unital channel constant p2.

    With ``user_cert = (q, M)`` the pair is validated (completely positive
    order, extremality, non-unitality) and its bound returned.  Otherwise the
    search tries M = N itself at q = 1 (preferred whenever N is extremal) and
    a randomized peel over extremal two-Kraus non-unital channels, keeping
    the best bound found.
    """
    if not ch.is_qubit():
        raise ChannelError("p2 certificates are implemented for qubit channels only")
    if ch.is_unital(tol.tp):
        raise ChannelError("channel is unital; p2 certificates apply to non-unital channels")

    if user_cert is not None:
        q, m = user_cert
        if not 0.0 < q <= 1.0:
            raise ChannelError("user certificate rejected: q outside (0, 1]")
        report = validate_channel(m, tol)
        if not report.ok:
            raise ChannelError("user certificate rejected: M is not a valid channel")
        if m.is_unital(tol.tp):
            raise ChannelError("user certificate rejected: M is unital")
        if not is_extreme_point(m):
            raise ChannelError("user certificate rejected: M is not an extreme point")
        margin = cp_order_margin(kraus_to_choi(ch), kraus_to_choi(m), q)
        if margin < -tol.psd:
            raise ChannelError(
                f"user certificate rejected: N - qM is not completely positive (margin {margin:.3e})"
            )
        return _certificate(q, m, method="user")

    self_lam = max(lambda_min_choi_of_adjoint_composition(ch), 0.0)
    best: ExtremalCertificate | None = None
    if self_lam > tol.psd:
        best = _certificate(1.0, ch, method="self")
        if best.m_extremal:
            return best

    for i in range(candidates):
        rng = rng_from(seed, i)
        try:
            m = random_extremal_nonunital_qubit_channel(rng)
        except RuntimeError:
            continue
        q = max_cp_weight(ch, m, tol)
        if q <= 1e-6:
            continue
        cand = _certificate(q, m, method="extremal_peel")
        if best is None or cand.p2_lower > best.p2_lower:
            best = cand
    if best is None:
        raise ChannelError("p2 search found no completely positive peel with positive weight")
    return best


def eb_peel_weight(
    ch: KrausChannel, candidates: int = 64, seed: int = 0, tol: Tolerances = DEFAULT_TOL
) -> float:
    """Best q with N >= q B over random entanglement-breaking candidates B
    (a lower bound on the entanglement-breaking weight of N)."""
    best = 0.0
    for i in range(candidates):
        rng = rng_from(seed, 1_000_000 + i)
        b = random_eb_qubit_channel(rng)
        best = max(best, max_cp_weight(ch, b, tol))
    return best


def p_constant(
    ch: KrausChannel,
    candidates: int = 256,
    eb_candidates: int = 64,
    seed: int = 0,
    tol: Tolerances = DEFAULT_TOL,
) -> PConstantReport:
    """The channel constant p = max(p1, p2) for a non-unitary qubit channel.

    Unital channels take the exact corner-search p1; non-unital channels
    combine the p2 certificate with any entanglement-breaking peel found,
    both certified lower bounds.
    """
    if not ch.is_qubit():
        raise ChannelError("the channel constant is defined for qubit channels")
    report = validate_channel(ch, tol)
    if not report.ok:
        raise ChannelError("channel fails validation; cannot certify a constant")
    if is_unitary_channel(ch):
        raise ChannelError("unitary channel: out of scope of the memory-time bound")
    if ch.is_unital(tol.tp):
        split = unital_split(ch, tol)
        return PConstantReport(
            p1=split.p1, p2_lower=0.0, p=split.p1, certification="exact_p1"
        )
    cert = p2_certificate(ch, candidates=candidates, seed=seed, tol=tol)
    p1_style = eb_peel_weight(ch, candidates=eb_candidates, seed=seed, tol=tol)
    p = max(cert.p2_lower, p1_style)
    if p <= 0.0:
        raise ChannelError("could not certify a positive channel constant")
    return PConstantReport(
        p1=p1_style, p2_lower=cert.p2_lower, p=p, certification="certified_lower_bound"
    )


# ---------------------------------------------------------------------------
# Entanglement-breaking test
# ---------------------------------------------------------------------------


def is_entanglement_breaking(ch: KrausChannel, tol: float = 1e-9) -> bool:
    """Positive-partial-transpose test on the Choi matrix (exact for qubit
    channels)."""
    if not ch.is_qubit():
        raise ChannelError("the PPT-of-Choi criterion is asserted for qubit channels only")
    c = kraus_to_choi(ch)
    pt = la.partial_transpose(c.matrix, c.out_dim, c.in_dim)
    return la.min_eig(pt) >= -tol
