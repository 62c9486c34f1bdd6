"""Quantum channels and states: representations, conversions, validation.

Channels are carried as Kraus operator lists.  The Choi matrix convention
places the output factor first,

    C = sum_ij T(|i><j|) (x) |i><j|,

so ``C`` is a (out_dim * in_dim) square matrix with ``Tr C = in_dim`` and the
partial trace over the output factor equal to the in_dim identity for any
trace-preserving map.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import linalg as la
from .config import DEFAULT_TOL, Tolerances


class ChannelError(ValueError):
    """Raised for malformed channels, states, or unsupported inputs."""


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensityState:
    """A validated density operator."""

    dim: int
    matrix: np.ndarray

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> "DensityState":
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ChannelError(f"density matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ChannelError("density matrix has non-finite entries")
        if la.herm_residual(m) > tol.herm:
            raise ChannelError("density matrix is not Hermitian within tolerance")
        if la.min_eig(m) < -tol.psd:
            raise ChannelError("density matrix is not positive semidefinite within tolerance")
        if abs(np.trace(m).real - 1.0) > tol.tp or abs(np.trace(m).imag) > tol.tp:
            raise ChannelError("density matrix trace differs from 1 beyond tolerance")
        return cls(dim=m.shape[0], matrix=la.frozen(m))

    @classmethod
    def pure(cls, vec: np.ndarray) -> "DensityState":
        v = np.asarray(vec, dtype=complex).reshape(-1)
        n = np.linalg.norm(v)
        if n == 0:
            raise ChannelError("zero vector cannot be normalized to a pure state")
        v = v / n
        return cls(dim=v.size, matrix=la.frozen(np.outer(v, v.conj())))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityState":
        return cls(dim=dim, matrix=la.frozen(np.eye(dim) / dim))


def bell_state() -> DensityState:
    """The maximally entangled two-qubit state (|00> + |11>)/sqrt(2)."""
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1 / np.sqrt(2)
    return DensityState.pure(v)


# ---------------------------------------------------------------------------
# Channel carriers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KrausChannel:
    """A completely positive map given by Kraus operators.

    Construction only enforces shape consistency so that invalid candidates
    can still be inspected; use :func:`validate_channel` for the
    trace-preservation / complete-positivity report.
    """

    in_dim: int
    out_dim: int
    kraus: tuple[np.ndarray, ...]

    @classmethod
    def from_kraus(cls, ops: Iterable[np.ndarray]) -> "KrausChannel":
        mats = tuple(la.frozen(np.asarray(k, dtype=complex)) for k in ops)
        if not mats:
            raise ChannelError("Kraus list must be nonempty")
        out_dim, in_dim = mats[0].shape
        for k in mats:
            if k.ndim != 2 or k.shape != (out_dim, in_dim):
                raise ChannelError(
                    f"inconsistent Kraus shapes: expected {(out_dim, in_dim)}, got {k.shape}"
                )
            if not np.all(np.isfinite(k)):
                raise ChannelError("Kraus operator has non-finite entries")
        return cls(in_dim=in_dim, out_dim=out_dim, kraus=mats)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        out = np.zeros((self.out_dim, self.out_dim), dtype=complex)
        for k in self.kraus:
            out += k @ rho @ la.dag(k)
        return out

    def transfer_matrix(self) -> np.ndarray:
        """Row-major superoperator: vec(T(X)) = M vec(X)."""
        m = np.zeros((self.out_dim**2, self.in_dim**2), dtype=complex)
        for k in self.kraus:
            m += np.kron(k, k.conj())
        return m

    def tp_residual(self) -> float:
        acc = sum(la.dag(k) @ k for k in self.kraus)
        return float(np.linalg.norm(acc - np.eye(self.in_dim), 2))

    def is_unital(self, tol: float = DEFAULT_TOL.tp) -> bool:
        acc = sum(k @ la.dag(k) for k in self.kraus)
        return bool(np.linalg.norm(acc - np.eye(self.out_dim), 2) <= tol)

    def is_qubit(self) -> bool:
        return self.in_dim == 2 and self.out_dim == 2


@dataclass(frozen=True)
class ChoiMatrix:
    in_dim: int
    out_dim: int
    matrix: np.ndarray

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(la.herm_part(self.matrix))

    def rank(self, rank_tol: float = 1e-9) -> int:
        return int(np.sum(self.eigenvalues() > rank_tol))


@dataclass(frozen=True)
class StinespringIsometry:
    in_dim: int
    out_dim: int
    env_dim: int
    v: np.ndarray

    def apply(self, rho: np.ndarray) -> np.ndarray:
        big = self.v @ np.asarray(rho, dtype=complex) @ la.dag(self.v)
        return la.partial_trace(big, (self.out_dim, self.env_dim), keep=(0,))

    def environment_output(self, rho: np.ndarray) -> np.ndarray:
        big = self.v @ np.asarray(rho, dtype=complex) @ la.dag(self.v)
        return la.partial_trace(big, (self.out_dim, self.env_dim), keep=(1,))


@dataclass(frozen=True)
class BlochAffine:
    """Qubit-channel normal form: rho -> U C_[t,lambda](V rho V^dag) U^dag.

    ``t`` and ``lam`` live in the rotated frame fixed by the pre/post
    unitaries.  Convention: transfer matrices that are already diagonal are
    returned as-is with identity rotations; otherwise a rotation-constrained
    SVD is used, absorbing reflections into the sign of the last entry of
    ``lam``.
    """

    t: np.ndarray
    lam: np.ndarray
    pre_unitary: np.ndarray
    post_unitary: np.ndarray

    @property
    def unital(self) -> bool:
        return bool(np.linalg.norm(self.t) <= DEFAULT_TOL.tp)

    def transfer(self) -> tuple[np.ndarray, np.ndarray]:
        """Overall Bloch action (t_total, M) with r -> t_total + M r."""
        ru = la.rotation_from_su2(self.post_unitary)
        rv = la.rotation_from_su2(self.pre_unitary)
        m = ru @ np.diag(self.lam) @ rv
        return ru @ self.t, m

    def to_channel(self, rank_tol: float = 1e-9) -> KrausChannel:
        t_total, m = self.transfer()
        return channel_from_bloch_transfer(t_total, m, rank_tol=rank_tol)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChannelValidation:
    tp_residual: float
    choi_min_eigenvalue: float
    tp_ok: bool
    cp_ok: bool

    @property
    def ok(self) -> bool:
        return self.tp_ok and self.cp_ok


def validate_channel(ch: KrausChannel, tol: Tolerances = DEFAULT_TOL) -> ChannelValidation:
    """Report trace-preservation and complete-positivity residuals."""
    tp_res = ch.tp_residual()
    cmin = la.min_eig(kraus_to_choi(ch).matrix)
    return ChannelValidation(
        tp_residual=tp_res,
        choi_min_eigenvalue=cmin,
        tp_ok=tp_res <= tol.tp,
        cp_ok=cmin >= -tol.psd,
    )


# ---------------------------------------------------------------------------
# Representation conversions
# ---------------------------------------------------------------------------


def kraus_to_choi(ch: KrausChannel) -> ChoiMatrix:
    d = ch.out_dim * ch.in_dim
    c = np.zeros((d, d), dtype=complex)
    for k in ch.kraus:
        v = la.vec_row(k)
        c += np.outer(v, v.conj())
    return ChoiMatrix(in_dim=ch.in_dim, out_dim=ch.out_dim, matrix=la.frozen(c))


def choi_to_kraus(c: ChoiMatrix, rank_tol: float = 1e-9, tol: Tolerances = DEFAULT_TOL) -> KrausChannel:
    """Minimal Kraus list from the Choi eigendecomposition."""
    w, v = np.linalg.eigh(la.herm_part(c.matrix))
    if w[0] < -tol.psd:
        raise ChannelError(f"Choi matrix is not PSD (min eigenvalue {w[0]:.3e})")
    ops = []
    for i in range(len(w) - 1, -1, -1):
        if w[i] > rank_tol:
            ops.append(np.sqrt(w[i]) * la.unvec_row(v[:, i], c.out_dim, c.in_dim))
    if not ops:
        raise ChannelError("Choi matrix has no eigenvalue above rank_tol")
    return KrausChannel.from_kraus(ops)


def canonical_kraus(ch: KrausChannel, rank_tol: float = 1e-9) -> KrausChannel:
    """Re-express a channel with a minimal (Choi-rank) Kraus list."""
    return choi_to_kraus(kraus_to_choi(ch), rank_tol=rank_tol)


def stinespring(ch: KrausChannel, rank_tol: float = 1e-9) -> StinespringIsometry:
    """Isometry V with T(X) = Tr_E(V X V^dag) and env_dim = Choi rank."""
    minimal = canonical_kraus(ch, rank_tol=rank_tol)
    env = len(minimal.kraus)
    v = np.zeros((minimal.out_dim * env, minimal.in_dim), dtype=complex)
    for e, k in enumerate(minimal.kraus):
        v[e::env, :] = k
    return StinespringIsometry(
        in_dim=minimal.in_dim, out_dim=minimal.out_dim, env_dim=env, v=la.frozen(v)
    )


def complementary_output(ch: KrausChannel, rho: np.ndarray, rank_tol: float = 1e-9) -> np.ndarray:
    """Environment (complementary-channel) output state for input rho."""
    minimal = canonical_kraus(ch, rank_tol=rank_tol)
    r = len(minimal.kraus)
    env = np.empty((r, r), dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    for i, ki in enumerate(minimal.kraus):
        for j, kj in enumerate(minimal.kraus):
            env[i, j] = np.trace(ki @ rho @ la.dag(kj))
    return env


# ---------------------------------------------------------------------------
# Algebra
# ---------------------------------------------------------------------------


def compose(a: KrausChannel, b: KrausChannel) -> KrausChannel:
    """The map X -> a(b(X)); ``b`` acts first."""
    if b.out_dim != a.in_dim:
        raise ChannelError(
            f"compose dimension mismatch: inner output {b.out_dim} vs outer input {a.in_dim}"
        )
    return KrausChannel.from_kraus([ka @ kb for ka in a.kraus for kb in b.kraus])


def tensor(a: KrausChannel, b: KrausChannel) -> KrausChannel:
    return KrausChannel.from_kraus([np.kron(ka, kb) for ka in a.kraus for kb in b.kraus])


def adjoint(a: KrausChannel) -> KrausChannel:
    """Adjoint (Heisenberg-picture) map; unital whenever ``a`` is TP.

    The result is a completely positive map carrier and generally not
    trace preserving.
    """
    return KrausChannel.from_kraus([la.dag(k) for k in a.kraus])


def choi_tensor(a: ChoiMatrix, b: ChoiMatrix) -> ChoiMatrix:
    """Choi matrix of the tensor-product map from the factor Chois.

    kron(C_a, C_b) orders the factors (out_a, in_a, out_b, in_b); the Choi
    of a (x) b needs (out_a, out_b, in_a, in_b), so the middle two factors
    are swapped.
    """
    big = np.kron(a.matrix, b.matrix)
    dims = (a.out_dim, a.in_dim, b.out_dim, b.in_dim)
    t = big.reshape(*dims, *dims)
    perm = (0, 2, 1, 3)
    t = t.transpose(*perm, *(4 + np.array(perm)))
    d = a.out_dim * b.out_dim * a.in_dim * b.in_dim
    return ChoiMatrix(
        in_dim=a.in_dim * b.in_dim,
        out_dim=a.out_dim * b.out_dim,
        matrix=la.frozen(t.reshape(d, d)),
    )


def choi_distance(a: KrausChannel, b: KrausChannel) -> float:
    """1-norm distance between the Choi matrices of two channels."""
    return la.trace_norm(kraus_to_choi(a).matrix - kraus_to_choi(b).matrix)


# ---------------------------------------------------------------------------
# Qubit Bloch-affine normal form
# ---------------------------------------------------------------------------


def bloch_transfer(ch: KrausChannel) -> tuple[np.ndarray, np.ndarray]:
    """(t, M) with Bloch action r -> t + M r for a qubit channel."""
    if not ch.is_qubit():
        raise ChannelError("Bloch representation requires a qubit channel")
    t = np.empty(3)
    m = np.empty((3, 3))
    out_id = ch.apply(la.I2)
    for j, pj in enumerate(la.PAULIS[1:]):
        t[j] = 0.5 * np.real(np.trace(pj @ out_id))
        for k, pk in enumerate(la.PAULIS[1:]):
            m[j, k] = 0.5 * np.real(np.trace(pj @ ch.apply(la.PAULIS[1 + k])))
    return t, m


def channel_from_bloch_transfer(t: np.ndarray, m: np.ndarray, rank_tol: float = 1e-9) -> KrausChannel:
    """Qubit channel with the given affine Bloch action (must be CP)."""
    t = np.asarray(t, dtype=float)
    m = np.asarray(m, dtype=float)
    basis_images = {
        "id": la.I2 + t[0] * la.PAULI_X + t[1] * la.PAULI_Y + t[2] * la.PAULI_Z,
        "x": m[0, 0] * la.PAULI_X + m[1, 0] * la.PAULI_Y + m[2, 0] * la.PAULI_Z,
        "y": m[0, 1] * la.PAULI_X + m[1, 1] * la.PAULI_Y + m[2, 1] * la.PAULI_Z,
        "z": m[0, 2] * la.PAULI_X + m[1, 2] * la.PAULI_Y + m[2, 2] * la.PAULI_Z,
    }
    # T(e_ij) by linearity: e.g. e00 = (id + z)/2, e01 = (x + i y)/2.
    t00 = 0.5 * (basis_images["id"] + basis_images["z"])
    t11 = 0.5 * (basis_images["id"] - basis_images["z"])
    t01 = 0.5 * (basis_images["x"] + 1j * basis_images["y"])
    t10 = 0.5 * (basis_images["x"] - 1j * basis_images["y"])
    c = np.zeros((4, 4), dtype=complex)
    for img, (i, j) in ((t00, (0, 0)), (t01, (0, 1)), (t10, (1, 0)), (t11, (1, 1))):
        e = np.zeros((2, 2), dtype=complex)
        e[i, j] = 1.0
        c += np.kron(img, e)
    return choi_to_kraus(ChoiMatrix(in_dim=2, out_dim=2, matrix=c), rank_tol=rank_tol)


def _signed_rotation_svd(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """m = W diag(lam) X with W, X in SO(3); reflections go into lam's sign."""
    w, s, xt = np.linalg.svd(m)
    x = xt.T
    flip_w = np.diag([1.0, 1.0, np.linalg.det(w)])
    flip_x = np.diag([1.0, 1.0, np.linalg.det(x)])
    lam = flip_w @ np.diag(s) @ flip_x
    return w @ flip_w, np.diag(lam).copy(), (x @ flip_x).T


def to_bloch_affine(ch: KrausChannel, tol: Tolerances = DEFAULT_TOL) -> BlochAffine:
    """Normal form of a qubit channel; see :class:`BlochAffine` for the
    sign convention."""
    t_total, m = bloch_transfer(ch)
    off = m - np.diag(np.diag(m))
    if np.max(np.abs(off)) <= tol.tp:
        lam = np.diag(m).copy()
        ru = np.eye(3)
        rv = np.eye(3)
    else:
        ru, lam, rv = _signed_rotation_svd(m)
    t_mid = ru.T @ t_total
    return BlochAffine(
        t=la.frozen(t_mid).real,
        lam=la.frozen(lam).real,
        pre_unitary=la.frozen(la.su2_from_rotation(rv)),
        post_unitary=la.frozen(la.su2_from_rotation(ru)),
    )


# ---------------------------------------------------------------------------
# Extreme points
# ---------------------------------------------------------------------------


def extremality_gap(ch: KrausChannel, rank_tol: float = 1e-9) -> float:
    """Smallest singular value of the {K_i^dag K_j} linear system.

    Computed on the minimal (Choi-rank) Kraus list; the channel is an
    extreme point of the CPTP set iff the gap is positive.
    """
    minimal = canonical_kraus(ch, rank_tol=rank_tol)
    prods = [la.dag(ki) @ kj for ki in minimal.kraus for kj in minimal.kraus]
    g = np.stack([p.reshape(-1) for p in prods], axis=1)
    if g.shape[1] > g.shape[0]:
        return 0.0
    return float(np.linalg.svd(g, compute_uv=False)[-1])


def is_extreme_point(ch: KrausChannel, tol: float = 1e-8) -> bool:
    return extremality_gap(ch) > tol


def is_unitary_channel(ch: KrausChannel, tol: float = 1e-9) -> bool:
    """Choi-rank-1 test (second Choi eigenvalue below ``tol``)."""
    if ch.in_dim != ch.out_dim:
        return False
    w = kraus_to_choi(ch).eigenvalues()
    return bool(w[-2] < tol) if len(w) >= 2 else True


# ---------------------------------------------------------------------------
# Preset channel families
# ---------------------------------------------------------------------------


def identity_channel(dim: int = 2) -> KrausChannel:
    return KrausChannel.from_kraus([np.eye(dim)])


def unitary_channel(u: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> KrausChannel:
    u = np.asarray(u, dtype=complex)
    if not la.is_unitary(u, tol.tp):
        raise ChannelError("matrix is not unitary within tolerance")
    return KrausChannel.from_kraus([u])


def depolarizing(p: float) -> KrausChannel:
    """rho -> (1-p) rho + p I/2.  p=1 is the completely depolarizing channel."""
    if not 0.0 <= p <= 1.0:
        raise ChannelError(f"depolarizing parameter must be in [0, 1], got {p}")
    ops = [np.sqrt(1.0 - 3.0 * p / 4.0) * la.I2]
    for pauli in la.PAULIS[1:]:
        ops.append(np.sqrt(p / 4.0) * pauli)
    return KrausChannel.from_kraus([k for k in ops if np.linalg.norm(k) > 0])


def completely_depolarizing() -> KrausChannel:
    return depolarizing(1.0)


def dephasing(p: float) -> KrausChannel:
    """rho -> (1-p/2) rho + (p/2) Z rho Z, i.e. lambda = (1-p, 1-p, 1)."""
    if not 0.0 <= p <= 1.0:
        raise ChannelError(f"dephasing parameter must be in [0, 1], got {p}")
    ops = [np.sqrt(1.0 - p / 2.0) * la.I2, np.sqrt(p / 2.0) * la.PAULI_Z]
    return KrausChannel.from_kraus([k for k in ops if np.linalg.norm(k) > 0])


def amplitude_damping(gamma: float) -> KrausChannel:
    if not 0.0 <= gamma <= 1.0:
        raise ChannelError(f"damping parameter must be in [0, 1], got {gamma}")
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=complex)
    k1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    ops = [k0, k1] if gamma > 0 else [k0]
    return KrausChannel.from_kraus(ops)


_PRESETS = {
    "identity": lambda **kw: identity_channel(int(kw.get("dim", 2))),
    "depolarizing": lambda **kw: depolarizing(float(kw["p"])),
    "dephasing": lambda **kw: dephasing(float(kw["p"])),
    "amplitude_damping": lambda **kw: amplitude_damping(float(kw["gamma"])),
    "unitary": lambda **kw: unitary_channel(np.asarray(kw["matrix"], dtype=complex)),
}


def preset(name: str, **params) -> KrausChannel:
    """Named channel family; see the channel-spec file format for parameters."""
    try:
        builder = _PRESETS[name]
    except KeyError:
        raise ChannelError(f"unknown preset {name!r}; choose from {sorted(_PRESETS)}") from None
    try:
        return builder(**params)
    except KeyError as missing:
        raise ChannelError(f"preset {name!r} missing parameter {missing}") from None
