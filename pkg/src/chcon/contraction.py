"""Contraction coefficients of channels and their computable bounds.

The trace-norm coefficient is estimated from below by a multi-start
alternating ascent over orthogonal pure-state pairs (exact in closed form
for qubit channels), and bounded from above by two certified quantities:
the minimal-output-eigenvalue bound sqrt(1 - lmin_out/d^2) and the weaker
Choi-eigenvalue bound sqrt(1 - lmin(C)/d^2).  The chi-square coefficient is
only ever reported as a sampled lower estimate.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from . import linalg as la
from .channels import ChannelError, KrausChannel, adjoint, compose, kraus_to_choi, to_bloch_affine
from .config import thread_count
from .divergences import chi2_divergence
from .sampling import random_density, random_full_rank_density, random_pure, rng_from

KINDS = ("eta_tr_estimate", "eta_tr_upper_minoutev", "eta_tr_upper_choi", "eta_chi_lower")


@dataclass(frozen=True)
class OrthogonalPair:
    """A pair of orthogonal unit vectors witnessing a contraction value."""

    psi: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        psi = la.frozen(self.psi).reshape(-1)
        phi = la.frozen(self.phi).reshape(-1)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "phi", phi)
        if abs(np.linalg.norm(psi) - 1) > 1e-12 or abs(np.linalg.norm(phi) - 1) > 1e-12:
            raise ChannelError("witness vectors must be unit norm")
        if abs(np.vdot(psi, phi)) > 1e-9:
            raise ChannelError("witness vectors must be orthogonal")

    def difference(self) -> np.ndarray:
        return np.outer(self.psi, self.psi.conj()) - np.outer(self.phi, self.phi.conj())


@dataclass(frozen=True)
class StatePair:
    rho: np.ndarray
    sigma: np.ndarray


@dataclass(frozen=True)
class ContractionReport:
    value: float
    kind: str
    witness: object | None
    restarts: int
    iterations: int
    seed: int
    method: str
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ChannelError(f"unknown report kind {self.kind!r}")
        if not 0.0 <= self.value <= 1.0:
            raise ChannelError(f"contraction value {self.value} outside [0, 1]")


def _require_endomorphism(ch: KrausChannel):
    if ch.in_dim != ch.out_dim:
        raise ChannelError("contraction coefficients require in_dim == out_dim")


def _multistart(worker, restarts: int):
    """Run ``worker(index)`` for each restart; deterministic result order."""
    n = thread_count()
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as ex:
            return list(ex.map(worker, range(restarts)))
    return [worker(i) for i in range(restarts)]


def _apply_transfer(tmat: np.ndarray, x: np.ndarray, d: int) -> np.ndarray:
    return (tmat @ x.reshape(-1)).reshape(d, d)


def evaluate_pair(ch: KrausChannel, pair: OrthogonalPair) -> float:
    """The maximand (1/2) || T(psi psi^dag - phi phi^dag) ||_1."""
    return 0.5 * la.trace_norm(ch.apply(pair.difference()))


def _random_orthogonal_pair(rng: np.random.Generator, d: int) -> tuple[np.ndarray, np.ndarray]:
    h = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = 0.5 * (h + la.dag(h))
    q = expm(1j * h)
    return q[:, 0], q[:, 1]


def eta_tr(
    ch: KrausChannel, restarts: int = 64, seed: int = 0, max_iter: int = 300, tol: float = 1e-9
) -> ContractionReport:
    """Trace-norm contraction coefficient.

    Qubit channels use the closed Bloch form (largest singular value of the
    3x3 transfer block), reported as exact.  Larger dimensions run a
    multi-start alternating ascent and report a certified lower bound.
    """
    _require_endomorphism(ch)
    d = ch.in_dim
    if ch.is_qubit():
        aff = to_bloch_affine(ch)
        _, m = aff.transfer()
        u_sv, s, vt = np.linalg.svd(m)
        value = float(min(max(s[0], 0.0), 1.0))
        n = vt[0]
        pair = OrthogonalPair(
            psi=la.pure_state_from_bloch(n), phi=la.pure_state_from_bloch(-n)
        )
        return ContractionReport(
            value=value, kind="eta_tr_estimate", witness=pair,
            restarts=0, iterations=0, seed=seed, method="bloch_exact",
        )

    tmat = ch.transfer_matrix()
    tadj = la.dag(tmat)

    def ascend(index: int):
        rng = rng_from(seed, index)
        psi, phi = _random_orthogonal_pair(rng, d)
        best = -np.inf
        iters = 0
        for _ in range(max_iter):
            delta = np.outer(psi, psi.conj()) - np.outer(phi, phi.conj())
            img = _apply_transfer(tmat, delta, d)
            val = 0.5 * la.trace_norm(img)
            iters += 1
            if val <= best + tol:
                best = max(best, val)
                break
            best = val
            s_op = la.sign_operator(img)
            x = la.herm_part(_apply_transfer(tadj, s_op, d))
            w, v = np.linalg.eigh(x)
            psi, phi = v[:, -1], v[:, 0]
        return best, (psi, phi), iters

    results = _multistart(ascend, restarts)
    best_idx = int(np.argmax([r[0] for r in results]))
    value, (psi, phi), _ = results[best_idx]
    total_iters = int(sum(r[2] for r in results))
    return ContractionReport(
        value=float(min(max(value, 0.0), 1.0)),
        kind="eta_tr_estimate",
        witness=OrthogonalPair(psi=psi, phi=phi),
        restarts=restarts,
        iterations=total_iters,
        seed=seed,
        method="multistart_sign_ascent",
    )


def min_output_eigenvalue(
    ch: KrausChannel, restarts: int = 24, seed: int = 0, max_iter: int = 200, tol: float = 1e-12
) -> tuple[float, tuple[np.ndarray, np.ndarray], int]:
    """Minimize <psi| (T^dag o T)(|phi><phi|) |psi> over pure pairs.

    The bilinear form is symmetric under swapping (psi, phi) because the
    superoperator T^dag o T is self-adjoint, so alternating smallest-
    eigenvector steps descend monotonically.  Returns (value, (psi, phi),
    iterations); the value is an upper estimate of the true minimum.
    """
    _require_endomorphism(ch)
    d = ch.in_dim
    tmat = ch.transfer_matrix()
    amat = la.dag(tmat) @ tmat

    def descend(index: int):
        rng = rng_from(seed, index)
        if index < d:
            phi = np.zeros(d, dtype=complex)
            phi[index] = 1.0
        else:
            phi = random_pure(rng, d)
        psi = phi
        best = np.inf
        iters = 0
        for _ in range(max_iter):
            m1 = la.herm_part(_apply_transfer(amat, np.outer(phi, phi.conj()), d))
            w, v = np.linalg.eigh(m1)
            psi = v[:, 0]
            val = float(w[0])
            m2 = la.herm_part(_apply_transfer(amat, np.outer(psi, psi.conj()), d))
            w2, v2 = np.linalg.eigh(m2)
            phi = v2[:, 0]
            val = min(val, float(w2[0]))
            iters += 1
            if val >= best - tol:
                best = min(best, val)
                break
            best = val
        return best, (psi, phi), iters

    results = _multistart(descend, restarts)
    best_idx = int(np.argmin([r[0] for r in results]))
    value, pair, _ = results[best_idx]
    total_iters = int(sum(r[2] for r in results))
    return max(float(value), 0.0), pair, total_iters


def eta_tr_upper_minoutev(
    ch: KrausChannel, restarts: int = 24, seed: int = 0
) -> ContractionReport:
    """Upper bound sqrt(1 - lmin_out(T^dag o T) / d^2) on the trace-norm
    contraction coefficient."""
    _require_endomorphism(ch)
    d = ch.in_dim
    lam, (psi, phi), iters = min_output_eigenvalue(ch, restarts=restarts, seed=seed)
    value = float(np.sqrt(max(1.0 - lam / d**2, 0.0)))
    try:
        witness = OrthogonalPair(psi=psi, phi=phi)
    except ChannelError:
        witness = None  # the minimizing pair need not be orthogonal
    return ContractionReport(
        value=min(value, 1.0),
        kind="eta_tr_upper_minoutev",
        witness=witness,
        restarts=restarts,
        iterations=iters,
        seed=seed,
        method="alternating_min_eigenvector",
        extras={"lambda_min_out": lam},
    )


def lambda_min_choi_of_adjoint_composition(ch: KrausChannel) -> float:
    """Smallest eigenvalue of the Choi matrix of T^dag o T (exact eigensolve)."""
    comp = compose(adjoint(ch), ch)
    return float(kraus_to_choi(comp).eigenvalues()[0])


def eta_tr_upper_choi(ch: KrausChannel, n_copies: int = 1, seed: int = 0) -> ContractionReport:
    """Upper bound sqrt(1 - (lmin(C_{T^dag o T}) / d^2)^n) for the n-fold
    tensor power, using multiplicativity of the smallest Choi eigenvalue."""
    _require_endomorphism(ch)
    if n_copies < 1:
        raise ChannelError("n_copies must be positive")
    d = ch.in_dim
    lam = max(lambda_min_choi_of_adjoint_composition(ch), 0.0)
    value = float(np.sqrt(max(1.0 - (lam / d**2) ** n_copies, 0.0)))
    return ContractionReport(
        value=min(value, 1.0),
        kind="eta_tr_upper_choi",
        witness=None,
        restarts=0,
        iterations=0,
        seed=seed,
        method="choi_eigensolve",
        extras={"lambda_min_choi": lam, "n_copies": n_copies},
    )


def eta_chi_lower(
    ch: KrausChannel,
    trials: int = 200,
    seed: int = 0,
    ascent_steps: int = 200,
    denom_floor: float = 1e-12,
) -> ContractionReport:
    """Sampled lower estimate of the chi-square contraction coefficient.

    Maximizes chi2(T(rho), T(sigma)) / chi2(rho, sigma) over random pairs
    (sigma kept full rank), then refines the best pair by random local
    ascent.  Degenerate samples (denominator below ``denom_floor``) are
    resampled.
    """
    _require_endomorphism(ch)
    d = ch.in_dim

    def ratio(rho, sigma):
        denom = chi2_divergence(rho, sigma)
        if not np.isfinite(denom) or denom < denom_floor:
            return None
        num = chi2_divergence(ch.apply(rho), ch.apply(sigma))
        if not np.isfinite(num):
            return None
        return num / denom

    rng = rng_from(seed, 0)
    best = 0.0
    best_pair = None
    drawn = 0
    budget = 10 * trials
    while drawn < trials and budget > 0:
        budget -= 1
        sigma = random_full_rank_density(rng, d, floor=1e-2)
        rho = random_density(rng, d)
        r = ratio(rho, sigma)
        if r is None:
            continue
        drawn += 1
        if r > best:
            best, best_pair = r, (rho, sigma)

    iters = 0
    if best_pair is not None:
        rho, sigma = best_pair
        rng2 = rng_from(seed, 1)
        for step in range(ascent_steps):
            scale = 0.5 * (1.0 - step / ascent_steps) + 1e-3
            mode = rng2.integers(0, 2)
            rho2, sigma2 = rho, sigma
            if mode == 0:
                bump = random_density(rng2, d, rank=1)
                rho2 = (1 - scale) * rho + scale * bump
            else:
                bump = random_full_rank_density(rng2, d, floor=1e-2)
                sigma2 = (1 - scale) * sigma + scale * bump
            r = ratio(rho2, sigma2)
            iters += 1
            if r is not None and r > best:
                best, (rho, sigma) = r, (rho2, sigma2)
        best_pair = (rho, sigma)

    witness = StatePair(rho=la.frozen(best_pair[0]), sigma=la.frozen(best_pair[1])) if best_pair else None
    return ContractionReport(
        value=float(min(max(best, 0.0), 1.0)),
        kind="eta_chi_lower",
        witness=witness,
        restarts=trials,
        iterations=iters,
        seed=seed,
        method="sampled_ratio_ascent",
    )


@dataclass(frozen=True)
class IndependenceReport:
    """Verdict on whether the channel trivializes orthogonality in one use.

    ``certified`` is decided by the exact smallest eigenvalue of the Choi
    matrix of T^dag o T (a rigorous lower bound on the minimal output
    eigenvalue): when it is positive the minimal-output-eigenvalue upper
    bound on the trace-norm contraction coefficient is strictly below one,
    certifying that no orthogonal pair stays perfectly distinguishable.
    """

    certified: bool
    status: str
    eta_upper_bound: float
    lambda_min_choi: float

    def __bool__(self) -> bool:
        return self.certified


def independence_trivial(ch: KrausChannel, seed: int = 0) -> IndependenceReport:
    _require_endomorphism(ch)
    lam_choi = lambda_min_choi_of_adjoint_composition(ch)
    upper = eta_tr_upper_minoutev(ch, seed=seed)
    certified = lam_choi > 1e-10
    return IndependenceReport(
        certified=certified,
        status="certified_alpha_one" if certified else "unknown",
        eta_upper_bound=upper.value,
        lambda_min_choi=float(lam_choi),
    )
