"""Quantitative consequences: memory-time thresholds, capacity brackets,
and the fault-tolerance space-overhead lower bound.

All logarithms are base 2 (qubits as units).  The capacity term of the
overhead bound always uses an UPPER bound on the quantum capacity, so the
emitted number is a sound lower bound on the physical qubit count; the
coherent-information maximization only ever feeds the bracket's lower
endpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .channels import (
    ChannelError,
    KrausChannel,
    choi_distance,
    complementary_output,
    depolarizing,
    identity_channel,
    tensor,
    to_bloch_affine,
)
from .config import DEFAULT_TOL, EPSILON_0, Tolerances
from .decompose import PConstantReport
from .sampling import random_pure, rng_from

ENTROPY_EIG_FLOOR = 1e-14


@dataclass(frozen=True)
class MemoryTimeBound:
    n: int
    p: float
    log2_threshold: float
    epsilon0: float = EPSILON_0

    @property
    def threshold(self) -> float:
        """(2/p)^(2n); inf when it overflows double precision."""
        try:
            return float(2.0**self.log2_threshold)
        except OverflowError:
            return math.inf


@dataclass(frozen=True)
class CapacityBracket:
    lower: float
    upper: float
    lower_provenance: str
    upper_provenance: str

    def __post_init__(self):
        if self.lower > self.upper + 1e-12:
            raise ChannelError(
                f"inconsistent capacity bracket: lower {self.lower} above upper {self.upper}"
            )


@dataclass(frozen=True)
class OverheadBound:
    n: int
    log2_t: float
    alpha: float
    bracket: CapacityBracket
    impossible: bool
    bound_value: float | None
    capacity_term_vacuous: bool
    notes: tuple[str, ...] = ()


def memory_time_bound(n: int, p_report: PConstantReport | float) -> MemoryTimeBound:
    """Circuit length (2/p)^(2n) beyond which no eps < 1/128 memory exists."""
    p = p_report.p if isinstance(p_report, PConstantReport) else float(p_report)
    if not 0.0 < p <= 1.0:
        raise ChannelError("channel constant must lie in (0, 1]")
    if n < 1:
        raise ChannelError("qubit count must be positive")
    log2_threshold = 2.0 * n * math.log2(2.0 / p)
    return MemoryTimeBound(n=n, p=p, log2_threshold=log2_threshold)


# ---------------------------------------------------------------------------
# Coherent information and capacity brackets
# ---------------------------------------------------------------------------


def entropy_bits(rho: np.ndarray) -> float:
    w = np.linalg.eigvalsh(la.herm_part(np.asarray(rho, dtype=complex)))
    w = w[w > ENTROPY_EIG_FLOOR]
    return float(-np.sum(w * np.log2(w)))


def coherent_information(ch: KrausChannel, rho: np.ndarray) -> float:
    """Single-use coherent information S(T(rho)) - S(env(rho))."""
    return entropy_bits(ch.apply(rho)) - entropy_bits(complementary_output(ch, rho))


def coherent_info_lower(
    ch: KrausChannel, restarts: int = 16, seed: int = 0, max_iter: int = 400
) -> float:
    """Certified lower bound on the quantum capacity from maximizing the
    single-use coherent information over qubit inputs (clamped at zero)."""
    if not ch.is_qubit():
        raise ChannelError("the coherent-information search is implemented for qubit channels")
    from scipy.optimize import minimize

    def neg_ic(r3):
        r = np.asarray(r3, dtype=float)
        nrm = np.linalg.norm(r)
        if nrm > 1.0 - 1e-12:
            r = r * ((1.0 - 1e-12) / nrm)
        return -coherent_information(ch, la.bloch_state(r))

    best = 0.0
    for i in range(restarts):
        rng = rng_from(seed, i)
        x0 = np.zeros(3) if i == 0 else rng.uniform(-0.7, 0.7, size=3)
        res = minimize(neg_ic, x0, method="Nelder-Mead",
                       options={"maxiter": max_iter, "xatol": 1e-9, "fatol": 1e-11})
        best = max(best, -float(res.fun))
    return best


_DEPOLARIZING_ZERO_CAPACITY_P = 1.0 / 3.0


def _match_depolarizing(ch: KrausChannel, tol: Tolerances) -> float | None:
    """Parameter p if the channel equals a depolarizing channel within
    conversion tolerance, else None."""
    if not ch.is_qubit():
        return None
    aff = to_bloch_affine(ch, tol)
    if not aff.unital:
        return None
    lam = np.asarray(aff.lam, dtype=float)
    p_hat = float(np.clip(1.0 - np.mean(lam), 0.0, 1.0))
    if choi_distance(ch, depolarizing(p_hat)) <= tol.conv:
        return p_hat
    return None


def capacity_bracket(
    ch: KrausChannel,
    user_upper: float | None = None,
    restarts: int = 16,
    seed: int = 0,
    tol: Tolerances = DEFAULT_TOL,
) -> CapacityBracket:
    """Two-sided capacity estimate: coherent information from below; the
    trivial one-qubit rate, a preset table (depolarizing with p > 1/3 has
    zero capacity), and any user certificate from above."""
    lower = coherent_info_lower(ch, restarts=restarts, seed=seed)
    upper = 1.0
    provenance = "trivial_log_d"
    p_hat = _match_depolarizing(ch, tol)
    if p_hat is not None and p_hat > _DEPOLARIZING_ZERO_CAPACITY_P:
        upper = 0.0
        provenance = f"preset_depolarizing_p={p_hat:.6f}"
    if user_upper is not None:
        if user_upper < lower - 1e-9:
            raise ChannelError(
                f"user capacity upper bound {user_upper} is below the computed lower bound {lower}"
            )
        if user_upper < upper:
            upper = float(user_upper)
            provenance = "user_certificate"
    lower = min(lower, upper)
    return CapacityBracket(
        lower=lower, upper=upper,
        lower_provenance="coherent_information_max", upper_provenance=provenance,
    )


def overhead_lower_bound(
    n: int,
    log2_t: float,
    p_report: PConstantReport | float,
    bracket: CapacityBracket,
) -> OverheadBound:
    """max(n / Q_upper, log2(T) / (2 log2(2/p))) physical qubits.

    When the capacity upper bound is zero the result is the tagged
    "impossible" variant; when it is only the trivial value 1 the capacity
    term degenerates to n and is flagged vacuous.
    """
    if n < 1 or log2_t < 0:
        raise ChannelError("need n >= 1 and T >= 1")
    p = p_report.p if isinstance(p_report, PConstantReport) else float(p_report)
    if not 0.0 < p <= 1.0:
        raise ChannelError("channel constant must lie in (0, 1]")
    alpha = 1.0 / (2.0 * math.log2(2.0 / p))
    notes = []
    if bracket.upper <= 0.0:
        return OverheadBound(
            n=n, log2_t=log2_t, alpha=alpha, bracket=bracket,
            impossible=True, bound_value=None, capacity_term_vacuous=False,
            notes=("zero quantum capacity: no noisy implementation at any size",),
        )
    vacuous = bracket.upper_provenance == "trivial_log_d"
    if vacuous:
        notes.append("capacity term uses the trivial upper bound 1 and reduces to n")
    log_term = alpha * log2_t
    cap_term = n / bracket.upper
    return OverheadBound(
        n=n, log2_t=log2_t, alpha=alpha, bracket=bracket,
        impossible=False, bound_value=float(max(cap_term, log_term)),
        capacity_term_vacuous=vacuous, notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# Near-identity stability estimates
# ---------------------------------------------------------------------------


def _max_pure_deviation(ch: KrausChannel, restarts: int, seed: int, max_iter: int = 200) -> float:
    """max over pure inputs of || T(psi psi) - psi psi ||_1 via the same
    sign-operator alternating ascent used for contraction coefficients."""
    d = ch.in_dim
    tmat = ch.transfer_matrix() - np.eye(d * d)
    tadj = la.dag(tmat)

    best = 0.0
    for i in range(restarts):
        rng = rng_from(seed, 7000 + i)
        psi = random_pure(rng, d)
        prev = -np.inf
        for _ in range(max_iter):
            img = (tmat @ np.outer(psi, psi.conj()).reshape(-1)).reshape(d, d)
            val = la.trace_norm(img)
            if val <= prev + 1e-12:
                break
            prev = val
            s_op = la.sign_operator(img)
            x = la.herm_part((tadj @ s_op.reshape(-1)).reshape(d, d))
            w, v = np.linalg.eigh(x)
            psi = v[:, -1]
        best = max(best, prev)
    return best


@dataclass(frozen=True)
class StabilityReport:
    epsilon: float
    extended_estimate: float
    extended_bound: float
    doubled_estimate: float
    doubled_bound: float
    passed: bool
    extras: dict = field(default_factory=dict)


def verify_stability_lemma(
    ch: KrausChannel, restarts: int = 12, seed: int = 0, slack: float = 1e-6
) -> StabilityReport:
    """Check the dimension-free stability of closeness to the identity.

    eps estimates ||T - I||_1 over pure inputs; the estimate of
    ||T (x) I - I (x) I||_1 over pure entangled two-qubit inputs must stay
    below sqrt(2 eps), and the doubled estimate (noise on both factors)
    below 2 sqrt(2 eps).  Estimated maxima are lower bounds of the true
    induced norms, so the checks are sound.
    """
    if not ch.is_qubit():
        raise ChannelError("the stability check is implemented for qubit channels")
    eps = _max_pure_deviation(ch, restarts=restarts, seed=seed)
    ident = identity_channel()
    extended = tensor(ch, ident)
    ext_est = _max_pure_deviation(extended, restarts=restarts, seed=seed + 1)
    doubled = tensor(ch, ch)
    dbl_est = _max_pure_deviation(doubled, restarts=restarts, seed=seed + 2)
    ext_bound = math.sqrt(2.0 * eps)
    dbl_bound = 2.0 * ext_bound
    passed = ext_est <= ext_bound + slack and dbl_est <= dbl_bound + slack
    return StabilityReport(
        epsilon=eps,
        extended_estimate=ext_est,
        extended_bound=ext_bound,
        doubled_estimate=dbl_est,
        doubled_bound=dbl_bound,
        passed=bool(passed),
        extras={"restarts": restarts, "seed": seed},
    )
