"""Separability machinery: PPT tests, distances to the separable set, and
the classical-quantum block formula for the chi-square distance.

The separable set is represented by the positive-partial-transpose (PPT)
spectrahedron, which is exact for 2x2 and 2x3 bipartitions and a relaxation
above; results carry a method tag making the distinction explicit.  Two
independent routes are available for sandwiching: projected-gradient descent
over the PPT set (from below for dsep, feasible-above for chisep's minimum)
and explicit separable-ensemble construction via conditional-gradient steps
over pure product states (certifying from the separable side).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .channels import ChannelError, DensityState, KrausChannel
from .config import DEFAULT_TOL, Tolerances
from .divergences import chi2_divergence
from .sampling import random_pure, rng_from

PPT_EXACT_DIMS = {(2, 2), (2, 3), (3, 2)}
EIG_FLOOR = 1e-14


# ---------------------------------------------------------------------------
# Carriers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BipartiteState:
    dim_a: int
    dim_b: int
    state: DensityState

    @classmethod
    def from_matrix(cls, matrix, dim_a: int, dim_b: int, tol: Tolerances = DEFAULT_TOL):
        st = DensityState.from_matrix(matrix, tol)
        if st.dim != dim_a * dim_b:
            raise ChannelError(f"state dim {st.dim} != {dim_a} * {dim_b}")
        return cls(dim_a=dim_a, dim_b=dim_b, state=st)

    @property
    def matrix(self) -> np.ndarray:
        return self.state.matrix


@dataclass(frozen=True)
class CcQqBlock:
    x: tuple
    y: tuple
    prob: float
    rho: np.ndarray


@dataclass(frozen=True)
class CcQqState:
    """Finitely supported classical labels (x, y) with one bipartite quantum
    state per label; classical registers are stored exactly."""

    dim_a: int
    dim_b: int
    blocks: tuple[CcQqBlock, ...]

    @classmethod
    def from_blocks(cls, dim_a: int, dim_b: int, blocks, tol: Tolerances = DEFAULT_TOL):
        def label(values) -> tuple:
            flat = np.atleast_1d(np.asarray(values, dtype=object))
            return tuple(int(v) if isinstance(v, (int, np.integer)) else str(v) for v in flat)

        out = []
        total = 0.0
        for x, y, p, rho in blocks:
            if p < -1e-15:
                raise ChannelError("block probabilities must be non-negative")
            st = DensityState.from_matrix(rho, tol)
            if st.dim != dim_a * dim_b:
                raise ChannelError("block dimension mismatch")
            out.append(CcQqBlock(x=label(x), y=label(y), prob=float(p), rho=st.matrix))
            total += float(p)
        if abs(total - 1.0) > 1e-12:
            raise ChannelError(f"block probabilities sum to {total}, not 1")
        return cls(dim_a=dim_a, dim_b=dim_b, blocks=tuple(out))

    @classmethod
    def single(cls, state: BipartiteState):
        return cls.from_blocks(state.dim_a, state.dim_b, [((), (), 1.0, state.matrix)])


@dataclass(frozen=True)
class SepApproxResult:
    value: float
    minimizer: DensityState | None
    method: str
    iterations: int
    converged: bool
    extras: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SepConfig:
    """Knobs for the separability optimizers; defaults match the documented
    convergence policy (objective-decrease tolerance 1e-8, 10k iteration cap,
    restarts from the maximally mixed state and the input's separable twirl)."""

    max_iter: int = 10000
    obj_tol: float = 1e-8
    barrier_stages: tuple = (1e-4, 1e-6, 1e-8, 1e-10, 1e-12)
    dykstra_iters: int = 400
    dykstra_tol: float = 1e-12
    seed: int = 0
    with_upper: bool = False
    fw_iters: int = 120
    fw_atom_cap: int = 64
    admm_iters: int = 3000
    admm_rho: float = 0.25


# ---------------------------------------------------------------------------
# PPT test
# ---------------------------------------------------------------------------


def is_ppt(s: BipartiteState, tol: float = 1e-9) -> bool:
    pt = la.partial_transpose(s.matrix, s.dim_a, s.dim_b)
    return la.min_eig(pt) >= -tol


def ppt_min_eigenvalue(s: BipartiteState) -> float:
    return la.min_eig(la.partial_transpose(s.matrix, s.dim_a, s.dim_b))


def _check_desk_scale(s: BipartiteState):
    if s.dim_a * s.dim_b > 16:
        raise ChannelError("separability machinery capped at total dimension 16")


def _method_tag(dim_a: int, dim_b: int) -> str:
    return "ppt_exact_2x2" if (dim_a, dim_b) in PPT_EXACT_DIMS else "ppt_lower_bound"


# ---------------------------------------------------------------------------
# chi-square objective on eigendata
# ---------------------------------------------------------------------------


def _chi2_trace_term(tau: np.ndarray, w: np.ndarray, v: np.ndarray) -> float:
    """Tr(tau S^{-1/2} tau S^{-1/2}) from the eigendecomposition (w, v) of S."""
    floor = max(float(w[-1]), 0.0) * EIG_FLOOR + 1e-300
    h = 1.0 / np.sqrt(np.clip(w, floor, None))
    t2 = la.dag(v) @ tau @ v
    return float(np.real(np.sum((np.abs(t2) ** 2) * np.outer(h, h))))


def _chi2_value_grad(tau: np.ndarray, sigma: np.ndarray, mu: float) -> tuple[float, np.ndarray]:
    """Value and gradient of chi2(tau, sigma) - mu * logdet(sigma) in sigma.

    Uses the Daleckii-Krein derivative of s -> s^{-1/2} on the eigenbasis of
    sigma.  Requires sigma positive definite numerically (eigenvalues are
    floored relative to the largest).
    """
    w, v = np.linalg.eigh(la.herm_part(sigma))
    top = max(float(w[-1]), EIG_FLOOR)
    wf = np.clip(w, top * EIG_FLOOR, None)
    h = 1.0 / np.sqrt(wf)
    t2 = la.dag(v) @ tau @ v
    value = float(np.real(np.sum((np.abs(t2) ** 2) * np.outer(h, h)))) - 1.0

    # Divided differences of g(s) = s^{-1/2}; the closed form
    # (g(a) - g(b)) / (a - b) = -1 / (sqrt(ab) (sqrt(a) + sqrt(b)))
    # is exact, has no cancellation, and covers coincident eigenvalues.
    roots = np.sqrt(wf)
    phi = -1.0 / (np.outer(roots, roots) * (roots[:, None] + roots[None, :]))
    b = t2 @ (h[:, None] * t2)  # = tau' G tau' in the eigenbasis
    grad_eig = 2.0 * b * phi
    if mu > 0.0:
        value -= mu * float(np.sum(np.log(wf)))
        grad_eig = grad_eig - mu * np.diag(1.0 / wf)
    grad = v @ grad_eig @ la.dag(v)
    return value, la.herm_part(grad)


def _chi2_interior_value_grad(
    tau: np.ndarray, sigma: np.ndarray, mu: float
) -> tuple[float, np.ndarray | None]:
    """chi2(tau, sigma) - mu logdet(sigma), +inf outside the open PSD cone.

    The barrier keeps iterates strictly positive so the partial-transpose
    constraint can be enforced by exact projection without a second wall.
    """
    w, v = np.linalg.eigh(la.herm_part(sigma))
    if float(w[0]) <= 0.0:
        return math.inf, None
    h = 1.0 / np.sqrt(w)
    t2 = la.dag(v) @ tau @ v
    value = float(np.real(np.sum((np.abs(t2) ** 2) * np.outer(h, h)))) - 1.0
    roots = np.sqrt(w)
    phi = -1.0 / (np.outer(roots, roots) * (roots[:, None] + roots[None, :]))
    b = t2 @ (h[:, None] * t2)
    grad_eig = 2.0 * b * phi
    if mu > 0.0:
        value -= mu * float(np.sum(np.log(w)))
        grad_eig = grad_eig - mu * np.diag(1.0 / w)
    grad = v @ grad_eig @ la.dag(v)
    return value, la.herm_part(grad)


# ---------------------------------------------------------------------------
# Projections
# ---------------------------------------------------------------------------


def _proj_ppt_cone(x: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    pt = la.partial_transpose(x, dim_a, dim_b)
    return la.partial_transpose(la.psd_project(pt), dim_a, dim_b)


def project_pt_trace(
    x: np.ndarray, dim_a: int, dim_b: int, iters: int = 400, tol: float = 1e-12
) -> np.ndarray:
    """Dykstra projection onto {Tr = 1} intersect {x^PT >= 0}.

    These two sets meet transversally (the hyperplane passes through the
    cone's interior), so the alternation converges in a handful of cycles,
    unlike the nearly tangent PSD/PT pair.
    """
    x = la.herm_part(x)
    d = x.shape[0]
    q = np.zeros_like(x)
    prev = x
    for _ in range(iters):
        y = prev - ((float(np.real(np.trace(prev))) - 1.0) / d) * np.eye(d)
        z = _proj_ppt_cone(y + q, dim_a, dim_b)
        q = y + q - z
        if np.linalg.norm(z - prev) < tol:
            prev = z
            break
        prev = z
    return prev


def project_ppt_density(
    x: np.ndarray, dim_a: int, dim_b: int, iters: int = 400, tol: float = 1e-12
) -> np.ndarray:
    """Dykstra projection onto {rho >= 0, Tr rho = 1} intersect {rho^PT >= 0}."""
    x = la.herm_part(x)
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    prev = x
    for _ in range(iters):
        y = la.density_project(prev + p)
        p = prev + p - y
        z = _proj_ppt_cone(y + q, dim_a, dim_b)
        q = y + q - z
        if np.linalg.norm(z - prev) < tol:
            prev = z
            break
        prev = z
    return prev


def separable_twirl(tau: np.ndarray, dim_a: int, dim_b: int, mix: float = 0.1) -> np.ndarray:
    """Classically correlated shadow of ``tau``: dephased in the product of
    the local reduced-state eigenbases, mixed towards the identity so the
    result is full rank."""
    ra = la.partial_trace(tau, (dim_a, dim_b), keep=(0,))
    rb = la.partial_trace(tau, (dim_a, dim_b), keep=(1,))
    _, va = np.linalg.eigh(la.herm_part(ra))
    _, vb = np.linalg.eigh(la.herm_part(rb))
    basis = np.kron(va, vb)
    diag = np.real(np.diag(la.dag(basis) @ tau @ basis))
    diag = np.clip(diag, 0.0, None)
    diag = diag / diag.sum() if diag.sum() > 0 else np.ones_like(diag) / diag.size
    dephased = (basis * diag) @ la.dag(basis)
    d = dim_a * dim_b
    return (1.0 - mix) * dephased + mix * np.eye(d) / d


# ---------------------------------------------------------------------------
# chi-square distance to the PPT set (projected gradient with barrier)
# ---------------------------------------------------------------------------


def _accelerated_pgd(value_grad, proj, x0, max_iter, stall_tol):
    """Projected gradient with Nesterov extrapolation and adaptive restart.

    ``value_grad(list) -> (f, grads)`` and ``proj(list) -> list`` operate on
    lists of Hermitian matrices.  Stops after three consecutive objective
    decreases below ``stall_tol``.  Returns (x, iterations, converged).
    """
    x = proj([m.copy() for m in x0])
    f_x, g_x = value_grad(x)
    if not math.isfinite(f_x):
        raise ChannelError("optimizer started outside the feasible interior")
    y, f_y, g_y = x, f_x, g_x
    t = 1.0
    step = 1.0
    iters = 0
    stall = 0
    momentum = False

    def trial(base, grads, alpha):
        # Cap the raw excursion so projections stay numerically meaningful;
        # the sufficient-decrease test below still sees the actual move.
        gnorm = math.sqrt(sum(float(np.linalg.norm(g) ** 2) for g in grads))
        alpha = min(alpha, 1e3 / gnorm) if gnorm > 0 else alpha
        return proj([m - alpha * g for m, g in zip(base, grads)])

    while iters < max_iter:
        cand = trial(y, g_y, step)
        f_c, g_c = value_grad(cand)
        inner = sum(float(np.real(np.vdot(g, c - m))) for g, c, m in zip(g_y, cand, y))
        delta_sq = sum(float(np.linalg.norm(c - m) ** 2) for c, m in zip(cand, y))
        halvings = 0
        while f_c > f_y + inner + delta_sq / (2 * step) + 1e-14 and halvings < 60:
            step *= 0.5
            cand = trial(y, g_y, step)
            f_c, g_c = value_grad(cand)
            inner = sum(float(np.real(np.vdot(g, c - m))) for g, c, m in zip(g_y, cand, y))
            delta_sq = sum(float(np.linalg.norm(c - m) ** 2) for c, m in zip(cand, y))
            halvings += 1
        iters += 1
        if f_c > f_x - 1e-15:
            if momentum:
                # Extrapolation overshot: restart from the best iterate.
                y, f_y, g_y = x, f_x, g_x
                t = 1.0
                momentum = False
                continue
            stall += 1
            if stall >= 3:
                return x, iters, True
            y, f_y, g_y = x, f_x, g_x
            t = 1.0
            momentum = False
            continue
        decrease = f_x - f_c
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        beta = (t - 1.0) / t_new
        # The extrapolated launch point may leave the feasible region (the
        # objective then reports +inf); fall back to the plain iterate.
        y = [c + beta * (c - m) for c, m in zip(cand, x)]
        f_y, g_y = value_grad(y)
        x, f_x, g_x = cand, f_c, g_c
        t = t_new
        momentum = True
        if not math.isfinite(f_y):
            y, f_y, g_y = x, f_x, g_x
            t = 1.0
            momentum = False
        if halvings == 0:
            step *= 1.2
        if decrease < stall_tol + 1e-14:
            stall += 1
            if stall >= 3:
                return x, iters, True
        else:
            stall = 0
    return x, iters, False


def _pgd_chi2(tau, dim_a, dim_b, sigma0, cfg: SepConfig) -> tuple[float, np.ndarray, int, bool]:
    """Barrier path following for the positive cone combined with exact
    projection onto the partial-transpose cone and the unit-trace plane.

    The binding constraint at a chi-square optimum is the partial-transpose
    one, which the projection handles with no conditioning penalty; the
    positivity barrier stays inactive for minimizers of full support and is
    laddered down through cfg.barrier_stages.
    """

    def proj(ms):
        return [project_pt_trace(ms[0], dim_a, dim_b, cfg.dykstra_iters, cfg.dykstra_tol)]

    sigma = [np.asarray(sigma0, dtype=complex)]
    total_iters = 0
    converged = False
    last = cfg.barrier_stages[-1]
    best_val, best_sigma = math.inf, sigma0
    for mu in cfg.barrier_stages:
        def value_grad(ms, _mu=mu):
            v, g = _chi2_interior_value_grad(tau, ms[0], _mu)
            return v, [g]

        budget = cfg.max_iter - total_iters
        if budget <= 0:
            break
        stall_tol = cfg.obj_tol * 1e-2 if mu == last else max(cfg.obj_tol * 1e-2, mu * 1e-2)
        sigma, it, converged = _accelerated_pgd(value_grad, proj, sigma, budget, stall_tol)
        total_iters += it
        if float(np.linalg.eigvalsh(la.herm_part(sigma[0]))[0]) > -1e-12:
            raw = float(max(chi2_divergence(tau, sigma[0]), 0.0))
            if raw < best_val:
                best_val, best_sigma = raw, sigma[0]
    return best_val, best_sigma, total_iters, converged


def chisep(s: BipartiteState, cfg: SepConfig = SepConfig()) -> SepApproxResult:
    """Minimum chi-square divergence from ``s`` to the PPT set.

    Separable inputs short-circuit to zero (the infimum is attained in the
    closure at the state itself).  Otherwise projected-gradient descent with
    a shrinking log-det barrier runs from the maximally mixed state and from
    the input's separable twirl; the lower of the two feasible values is
    returned.  With ``cfg.with_upper`` a separable-ensemble upper bound is
    also computed and reported in the extras.
    """
    _check_desk_scale(s)
    tau = s.matrix
    d = s.dim_a * s.dim_b
    if is_ppt(s):
        return SepApproxResult(
            value=0.0, minimizer=s.state, method=_method_tag(s.dim_a, s.dim_b),
            iterations=0, converged=True,
            extras={"note": "input is PPT; chi-square distance zero in the closure",
                    "ppt_min_eig": ppt_min_eigenvalue(s)},
        )
    starts = [np.eye(d) / d, separable_twirl(tau, s.dim_a, s.dim_b)]
    best = None
    iters = 0
    conv = True
    for s0 in starts:
        val, sig, it, ok = _pgd_chi2(tau, s.dim_a, s.dim_b, s0, cfg)
        iters += it
        conv = conv and ok
        if best is None or val < best[0]:
            best = (val, sig)
    value, sigma = best
    extras = {
        "final_min_eig_sigma": float(np.linalg.eigvalsh(la.herm_part(sigma))[0]),
        "ppt_min_eig_input": ppt_min_eigenvalue(s),
    }
    if cfg.with_upper:
        up_val, ensemble = chisep_upper_ensemble(s, cfg)
        extras["upper_value"] = up_val
        extras["upper_gap"] = up_val - value
        extras["ensemble_terms"] = len(ensemble)
    return SepApproxResult(
        value=value,
        minimizer=DensityState.from_matrix(la.density_project(sigma)),
        method=_method_tag(s.dim_a, s.dim_b),
        iterations=iters,
        converged=conv,
        extras=extras,
    )


# ---------------------------------------------------------------------------
# Pure-product linear oracle and conditional-gradient ensembles
# ---------------------------------------------------------------------------


def _product_oracle(
    g: np.ndarray, dim_a: int, dim_b: int, rng: np.random.Generator,
    restarts: int = 6, sweeps: int = 12,
) -> tuple[np.ndarray, np.ndarray]:
    """Approximate argmin over pure product states of Tr(G (rho_a x rho_b))
    by alternating smallest-eigenvector sweeps with multi-starts."""
    g = la.herm_part(g)
    best_val, best = math.inf, None
    for r in range(restarts):
        b = random_pure(rng, dim_b) if r > 0 else np.ones(dim_b, dtype=complex) / math.sqrt(dim_b)
        a = None
        for _ in range(sweeps):
            rho_b = np.outer(b, b.conj())
            ma = la.partial_trace(g @ np.kron(np.eye(dim_a), rho_b), (dim_a, dim_b), keep=(0,))
            wa, va = np.linalg.eigh(la.herm_part(ma))
            a = va[:, 0]
            rho_a = np.outer(a, a.conj())
            mb = la.partial_trace(g @ np.kron(rho_a, np.eye(dim_b)), (dim_a, dim_b), keep=(1,))
            wb, vb = np.linalg.eigh(la.herm_part(mb))
            b = vb[:, 0]
            val = float(wb[0])
        if val < best_val:
            best_val, best = val, (a, b)
    return best


def _ensemble_state(ensemble) -> np.ndarray:
    acc = None
    for w, rho_a, rho_b in ensemble:
        term = w * np.kron(rho_a, rho_b)
        acc = term if acc is None else acc + term
    return acc


def _polish_weights(ensemble, grad_fn, steps: int = 200) -> list:
    """Simplex-projected gradient on the ensemble weights (atoms fixed)."""
    atoms = [(rho_a, rho_b) for _, rho_a, rho_b in ensemble]
    mats = [np.kron(a, b) for a, b in atoms]
    w = np.array([max(x, 0.0) for x, _, _ in ensemble])
    w = w / w.sum()
    step = 0.5
    sigma = sum(wi * m for wi, m in zip(w, mats))
    f, g = grad_fn(sigma)
    for _ in range(steps):
        gw = np.array([float(np.real(np.vdot(g, m))) for m in mats])
        w_new = la.simplex_project(w - step * gw)
        sigma_new = sum(wi * m for wi, m in zip(w_new, mats))
        f_new, g_new = grad_fn(sigma_new)
        if f_new <= f:
            w, sigma, f, g = w_new, sigma_new, f_new, g_new
            step *= 1.2
        else:
            step *= 0.5
            if step < 1e-12:
                break
    return [(float(wi), a, b) for wi, (a, b) in zip(w, atoms) if wi > 1e-12]


def _frank_wolfe_separable(tau_like_grad, dim_a, dim_b, cfg: SepConfig, seed_salt: int = 77):
    """Conditional-gradient minimization of a smooth convex objective over
    the separable set, tracking an explicit product ensemble.

    ``tau_like_grad(sigma) -> (value, grad)`` must be convex in sigma.
    Starts from the maximally mixed product (I/dA x I/dB).
    """
    rng = rng_from(cfg.seed, seed_salt)
    ia = np.eye(dim_a) / dim_a
    ib = np.eye(dim_b) / dim_b
    ensemble = [(1.0, ia, ib)]
    sigma = _ensemble_state(ensemble)
    f, g = tau_like_grad(sigma)
    for it in range(cfg.fw_iters):
        a, b = _product_oracle(g, dim_a, dim_b, rng)
        atom = np.kron(np.outer(a, a.conj()), np.outer(b, b.conj()))
        gap = float(np.real(np.vdot(g, sigma - atom)))
        if gap < 1e-12:
            break
        # Exact-enough 1-D line search on the convex restriction.
        lo, hi = 0.0, 1.0
        for _ in range(40):
            m1 = lo + (hi - lo) / 3
            m2 = hi - (hi - lo) / 3
            f1, _ = tau_like_grad((1 - m1) * sigma + m1 * atom)
            f2, _ = tau_like_grad((1 - m2) * sigma + m2 * atom)
            if f1 <= f2:
                hi = m2
            else:
                lo = m1
        gamma = 0.5 * (lo + hi)
        if gamma <= 1e-14:
            break
        ensemble = [(w * (1 - gamma), ra, rb) for w, ra, rb in ensemble]
        ensemble.append((gamma, np.outer(a, a.conj()), np.outer(b, b.conj())))
        sigma = (1 - gamma) * sigma + gamma * atom
        f, g = tau_like_grad(sigma)
        if (it + 1) % 10 == 0 or len(ensemble) > cfg.fw_atom_cap:
            ensemble = _polish_weights(ensemble, tau_like_grad)
            sigma = _ensemble_state(ensemble)
            f, g = tau_like_grad(sigma)
    ensemble = _polish_weights(ensemble, tau_like_grad)
    sigma = _ensemble_state(ensemble)
    return sigma, ensemble


def chisep_upper_ensemble(s: BipartiteState, cfg: SepConfig = SepConfig()):
    """Separable-ensemble upper bound on the chi-square distance.

    Returns (value, ensemble); the ensemble is an explicit list of
    (weight, rho_A, rho_B) product terms certifying the value from the
    separable side.
    """
    _check_desk_scale(s)
    tau = s.matrix

    def obj(sigma):
        return _chi2_value_grad(tau, sigma, 0.0)

    sigma, ensemble = _frank_wolfe_separable(obj, s.dim_a, s.dim_b, cfg)
    return float(max(chi2_divergence(tau, sigma), 0.0)), ensemble


# ---------------------------------------------------------------------------
# 1-norm distance to the PPT set
# ---------------------------------------------------------------------------


def _soft_threshold_eig(x: np.ndarray, t: float) -> np.ndarray:
    w, v = np.linalg.eigh(la.herm_part(x))
    w = np.sign(w) * np.clip(np.abs(w) - t, 0.0, None)
    return (v * w) @ la.dag(v)


def dsep(s: BipartiteState, cfg: SepConfig = SepConfig()) -> SepApproxResult:
    """Minimum of ||tau - zeta||_1 over the PPT set by convex splitting.

    Alternates the eigenvalue soft-threshold proximal step of the 1-norm
    with Dykstra projection onto the PPT density set; the running best over
    feasible iterates is returned.  Exact (up to tolerance) for 2x2 and 2x3;
    a lower bound on the separable distance otherwise.
    """
    _check_desk_scale(s)
    tau = s.matrix
    if is_ppt(s):
        return SepApproxResult(
            value=0.0, minimizer=s.state, method=_method_tag(s.dim_a, s.dim_b),
            iterations=0, converged=True, extras={"note": "input is PPT"},
        )
    d = s.dim_a * s.dim_b
    rho = cfg.admm_rho
    z = np.eye(d) / d
    u = np.zeros_like(tau)
    best_val, best_z = math.inf, z
    converged = False
    it = 0
    for it in range(1, cfg.admm_iters + 1):
        x = tau - _soft_threshold_eig(tau - (z - u), rho)
        z_new = project_ppt_density(x + u, s.dim_a, s.dim_b, cfg.dykstra_iters, cfg.dykstra_tol)
        u = u + x - z_new
        val = la.trace_norm(tau - z_new)
        if val < best_val:
            best_val, best_z = val, z_new
        prim = np.linalg.norm(x - z_new)
        dual = np.linalg.norm(z_new - z)
        z = z_new
        if prim < 1e-10 and dual < 1e-10:
            converged = True
            break
    return SepApproxResult(
        value=float(best_val),
        minimizer=DensityState.from_matrix(la.density_project(best_z)),
        method=_method_tag(s.dim_a, s.dim_b),
        iterations=it,
        converged=converged,
        extras={},
    )


def dsep_upper_ensemble(s: BipartiteState, cfg: SepConfig = SepConfig()):
    """Certified upper bound on the separable 1-norm distance.

    Decomposes the PPT minimizer into an explicit product ensemble by
    conditional-gradient Frobenius fitting, then evaluates ||tau - sigma||_1
    at the ensemble state (any ensemble value upper-bounds the separable
    minimum).  Returns a SepApproxResult with method ``ensemble_upper_bound``.
    """
    _check_desk_scale(s)
    inner = dsep(s, cfg)
    target = inner.minimizer.matrix if inner.minimizer is not None else s.matrix

    def obj(sigma):
        delta = sigma - target
        return float(np.real(np.vdot(delta, delta))), 2.0 * delta

    sigma, ensemble = _frank_wolfe_separable(obj, s.dim_a, s.dim_b, cfg, seed_salt=78)
    value = la.trace_norm(s.matrix - sigma)
    return SepApproxResult(
        value=float(value),
        minimizer=DensityState.from_matrix(la.density_project(sigma)),
        method="ensemble_upper_bound",
        iterations=len(ensemble),
        converged=True,
        extras={"fit_residual_fro": float(np.linalg.norm(sigma - target)),
                "ensemble": ensemble},
    )


# ---------------------------------------------------------------------------
# cc-qq states: the block formula and the direct block-diagonal oracle
# ---------------------------------------------------------------------------


def chisep_ccqq(s: CcQqState, cfg: SepConfig = SepConfig()) -> SepApproxResult:
    """Chi-square distance to the separable set across (XA : BY) for a cc-qq
    state, via per-block values combined as (sum_xy p sqrt(chi+1))^2 - 1.

    The optimal block weights q_xy = p sqrt(chi+1) / Z are exposed in the
    extras for diagnostics.
    """
    per_block = []
    iters = 0
    conv = True
    for blk in s.blocks:
        if blk.prob <= 1e-15:
            per_block.append(0.0)
            continue
        res = chisep(BipartiteState.from_matrix(blk.rho, s.dim_a, s.dim_b), cfg)
        per_block.append(res.value)
        iters += res.iterations
        conv = conv and res.converged
    z_terms = [blk.prob * math.sqrt(v + 1.0) for blk, v in zip(s.blocks, per_block)]
    z = sum(z_terms)
    value = max(z * z - 1.0, 0.0)
    q = [t / z for t in z_terms] if z > 0 else [0.0 for _ in z_terms]
    return SepApproxResult(
        value=float(value),
        minimizer=None,
        method=_method_tag(s.dim_a, s.dim_b),
        iterations=iters,
        converged=conv,
        extras={"per_block": per_block, "q_weights": q},
    )


def chisep_ccqq_blockdiag(s: CcQqState, cfg: SepConfig = SepConfig()) -> SepApproxResult:
    """Direct minimization of chi2 over block-diagonal PPT states.

    The variable is one unnormalized PSD-and-PT-PSD matrix per classical
    label with unit total trace; the objective sum_b p_b^2 Tr(rho_b S_b^-1/2
    rho_b S_b^-1/2) - 1 is minimized by joint projected gradient.  Serves as
    the independent cross-check of the closed block formula.
    """
    blocks = [b for b in s.blocks if b.prob > 1e-15]
    n = len(blocks)
    d = s.dim_a * s.dim_b
    mats = [np.eye(d) / (n * d) for _ in range(n)]
    total_dim = n * d

    def proj(ms):
        # Dykstra between the product of PT cones and the total-trace plane.
        cur = [la.herm_part(m) for m in ms]
        corr = [np.zeros_like(m) for m in ms]
        prev = cur
        for _ in range(cfg.dykstra_iters):
            excess = (sum(float(np.real(np.trace(m))) for m in prev) - 1.0) / total_dim
            y = [m - excess * np.eye(d) for m in prev]
            z = [_proj_ppt_cone(m + c, s.dim_a, s.dim_b) for m, c in zip(y, corr)]
            corr = [m + c - zz for m, c, zz in zip(y, corr, z)]
            change = math.sqrt(sum(float(np.linalg.norm(a - b) ** 2) for a, b in zip(z, prev)))
            prev = z
            if change < cfg.dykstra_tol:
                break
        return prev

    total_iters = 0
    converged = False
    last = cfg.barrier_stages[-1]
    for mu in cfg.barrier_stages:
        def value_grad(ms, _mu=mu):
            total = -1.0
            grads = []
            for blk, m in zip(blocks, ms):
                # The interior variant subtracts 1 internally; undo per block.
                v, g = _chi2_interior_value_grad(blk.rho, m, _mu)
                if not math.isfinite(v):
                    return math.inf, None
                total += blk.prob**2 * (v + 1.0)
                grads.append(blk.prob**2 * g)
            return total, grads

        budget = cfg.max_iter - total_iters
        if budget <= 0:
            break
        stall_tol = cfg.obj_tol * 1e-2 if mu == last else max(cfg.obj_tol * 1e-2, mu * 1e-2)
        mats, it, converged = _accelerated_pgd(value_grad, proj, mats, budget, stall_tol)
        total_iters += it

    # Final value without barrier, from the true chi-square definition.
    value = -1.0
    for blk, m in zip(blocks, mats):
        q_b = float(np.real(np.trace(m)))
        if q_b <= 1e-300:
            return SepApproxResult(
                value=math.inf, minimizer=None, method=_method_tag(s.dim_a, s.dim_b),
                iterations=total_iters, converged=False,
                extras={"note": "a block weight collapsed"},
            )
        sigma_b = m / q_b
        value += blk.prob**2 / q_b * (max(chi2_divergence(blk.rho, sigma_b), 0.0) + 1.0)
    return SepApproxResult(
        value=float(max(value, 0.0)),
        minimizer=None,
        method=_method_tag(s.dim_a, s.dim_b),
        iterations=total_iters,
        converged=converged,
        extras={"block_traces": [float(np.real(np.trace(m))) for m in mats]},
    )


# ---------------------------------------------------------------------------
# Separable channels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeparableChannel:
    """Bipartite channel with product Kraus operators K_A (x) K_B."""

    pairs: tuple[tuple[np.ndarray, np.ndarray], ...]
    a_in: int
    a_out: int
    b_in: int
    b_out: int

    @property
    def channel(self) -> KrausChannel:
        return KrausChannel.from_kraus([np.kron(ka, kb) for ka, kb in self.pairs])

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return self.channel.apply(rho)


def make_separable_channel(pairs, tol: Tolerances = DEFAULT_TOL) -> SeparableChannel:
    """Build and validate a separable channel from explicit factor pairs.

    The factor list must be dimension consistent and the derived map trace
    preserving; anything else is rejected (a global unitary like SWAP has no
    such factorization and simply cannot be expressed here).
    """
    frozen_pairs = []
    a_shape = b_shape = None
    for ka, kb in pairs:
        ka = np.asarray(ka, dtype=complex)
        kb = np.asarray(kb, dtype=complex)
        if ka.ndim != 2 or kb.ndim != 2:
            raise ChannelError("factor operators must be matrices")
        if a_shape is None:
            a_shape, b_shape = ka.shape, kb.shape
        if ka.shape != a_shape or kb.shape != b_shape:
            raise ChannelError("inconsistent factor dimensions across pairs")
        frozen_pairs.append((la.frozen(ka), la.frozen(kb)))
    if not frozen_pairs:
        raise ChannelError("separable channel needs at least one factor pair")
    sep = SeparableChannel(
        pairs=tuple(frozen_pairs),
        a_in=a_shape[1], a_out=a_shape[0], b_in=b_shape[1], b_out=b_shape[0],
    )
    res = sep.channel.tp_residual()
    if res > tol.tp:
        raise ChannelError(f"factor pairs do not form a channel (TP residual {res:.3e})")
    return sep


def local_product_channel(ch_a: KrausChannel, ch_b: KrausChannel) -> SeparableChannel:
    """The separable channel T_A (x) T_B from two local channels."""
    pairs = [(ka, kb) for ka in ch_a.kraus for kb in ch_b.kraus]
    return make_separable_channel(pairs)


def mixture_of_local_pairs(terms) -> SeparableChannel:
    """sum_i p_i (A_i (x) B_i) from (prob, channel_a, channel_b) terms."""
    pairs = []
    for p, ch_a, ch_b in terms:
        if p < 0:
            raise ChannelError("mixture weights must be non-negative")
        root = math.sqrt(p)
        pairs.extend((root * ka, kb) for ka in ch_a.kraus for kb in ch_b.kraus)
    return make_separable_channel(pairs)


def apply_separable_to_ccqq(s: CcQqState, t: SeparableChannel) -> CcQqState:
    if t.a_in != s.dim_a or t.b_in != s.dim_b:
        raise ChannelError("separable channel dimensions do not match the state")
    blocks = [(b.x, b.y, b.prob, t.apply(b.rho)) for b in s.blocks]
    return CcQqState.from_blocks(t.a_out, t.b_out, blocks)


# ---------------------------------------------------------------------------
# Single-step contraction check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContractionStepReport:
    passed: bool
    chi_in: float
    chi_out: float
    eta_upper: float
    rhs: float
    slack: float
    eta_chi_diagnostic: float
    epsilon: float


def verify_contraction_step(
    s: CcQqState,
    t: SeparableChannel,
    epsilon: float,
    cfg: SepConfig = SepConfig(),
    slack_tol: float = 1e-6,
) -> ContractionStepReport:
    """Check one separable-channel step of the chi-square contraction bound.

    Both sides of chi_out <= (1 - eps^2/100 (1 - eta)) chi_in are evaluated
    with eta the certified minimal-output-eigenvalue upper bound on the
    trace-norm contraction coefficient of ``t`` (which upper-bounds the
    chi-square coefficient, making the right side sound).  The sampled
    chi-square coefficient estimate is reported for diagnostics only.
    """
    from .contraction import eta_chi_lower, eta_tr_upper_minoutev

    if not 0.0 < epsilon < 1.0:
        raise ChannelError("epsilon must lie in (0, 1)")
    chi_in = chisep_ccqq(s, cfg).value
    if chi_in < epsilon:
        raise ChannelError(
            f"precondition violated: chi-square distance {chi_in:.6f} below epsilon {epsilon}"
        )
    out = apply_separable_to_ccqq(s, t)
    chi_out = chisep_ccqq(out, cfg).value
    eta_up = eta_tr_upper_minoutev(t.channel, seed=cfg.seed).value
    eta_diag = eta_chi_lower(t.channel, trials=50, seed=cfg.seed).value
    rhs = (1.0 - epsilon**2 / 100.0 * (1.0 - eta_up)) * chi_in
    slack = rhs - chi_out
    return ContractionStepReport(
        passed=bool(chi_out <= rhs + slack_tol),
        chi_in=chi_in,
        chi_out=chi_out,
        eta_upper=eta_up,
        rhs=rhs,
        slack=slack,
        eta_chi_diagnostic=eta_diag,
        epsilon=epsilon,
    )
