"""Dense linear-algebra helpers for small (dim <= 16) quantum objects."""

from __future__ import annotations

import numpy as np

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, PAULI_X, PAULI_Y, PAULI_Z)


def dag(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def frozen(a: np.ndarray) -> np.ndarray:
    """Return a read-only complex copy (value types are immutable)."""
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


def herm_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dag(a))


def herm_residual(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - dag(a), 2))


def min_eig(a: np.ndarray) -> float:
    """Smallest eigenvalue of (the Hermitian part of) ``a``."""
    return float(np.linalg.eigvalsh(herm_part(a))[0])


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values; uses eigenvalues when ``a`` is Hermitian."""
    if herm_residual(a) < 1e-12 * max(1.0, np.linalg.norm(a)):
        return float(np.abs(np.linalg.eigvalsh(herm_part(a))).sum())
    return float(np.linalg.svd(a, compute_uv=False).sum())


def is_unitary(u: np.ndarray, tol: float) -> bool:
    d = u.shape[0]
    return u.shape == (d, d) and np.linalg.norm(dag(u) @ u - np.eye(d), 2) <= tol


def kron_all(mats) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def partial_trace(rho: np.ndarray, dims: tuple[int, ...], keep: tuple[int, ...]) -> np.ndarray:
    """Trace out every tensor factor not listed in ``keep``.

    ``dims`` are the factor dimensions in tensor order; the result keeps the
    factors in their original relative order.
    """
    n = len(dims)
    keep = tuple(keep)
    t = rho.reshape(*dims, *dims)
    # Contract the traced factors pairwise (ket index i, bra index i + n).
    traced = [i for i in range(n) if i not in keep]
    for count, i in enumerate(sorted(traced)):
        off = i - count  # earlier contractions removed one ket and one bra axis
        nk = t.ndim // 2
        t = np.trace(t, axis1=off, axis2=off + nk)
    d_keep = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(d_keep, d_keep)


def partial_transpose(rho: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    """Transpose the second tensor factor of a (dim_a * dim_b) square matrix."""
    t = rho.reshape(dim_a, dim_b, dim_a, dim_b)
    return t.transpose(0, 3, 2, 1).reshape(dim_a * dim_b, dim_a * dim_b)


def swap_factors(mat: np.ndarray, dim_1: int, dim_2: int) -> np.ndarray:
    """Reorder a matrix on C^{dim_1} (x) C^{dim_2} to C^{dim_2} (x) C^{dim_1}."""
    t = mat.reshape(dim_1, dim_2, dim_1, dim_2)
    return t.transpose(1, 0, 3, 2).reshape(dim_1 * dim_2, dim_1 * dim_2)


def psd_project(a: np.ndarray) -> np.ndarray:
    """Frobenius projection of a Hermitian matrix onto the PSD cone."""
    w, v = np.linalg.eigh(herm_part(a))
    w = np.clip(w, 0.0, None)
    return (v * w) @ dag(v)


def simplex_project(y: np.ndarray) -> np.ndarray:
    """Euclidean projection of a real vector onto the probability simplex."""
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(y) + 1)
    cond = u - css / idx > 0
    cond[0] = True  # mathematically guaranteed; guards float collapse at huge scales
    rho = idx[cond][-1]
    theta = css[cond][-1] / rho
    return np.clip(y - theta, 0.0, None)


def density_project(a: np.ndarray) -> np.ndarray:
    """Frobenius projection onto {rho >= 0, Tr rho = 1}."""
    w, v = np.linalg.eigh(herm_part(a))
    w = simplex_project(w)
    return (v * w) @ dag(v)


def sqrtm_psd(a: np.ndarray) -> np.ndarray:
    """Principal square root of a PSD matrix via eigendecomposition."""
    w, v = np.linalg.eigh(herm_part(a))
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w) @ dag(v)


def inv_sqrtm_support(a: np.ndarray, rel_tol: float) -> np.ndarray:
    """Generalized inverse square root on the support of a PSD matrix.

    Eigenvalues below ``rel_tol`` times the largest one count as zero.
    """
    w, v = np.linalg.eigh(herm_part(a))
    top = max(float(w[-1]), 0.0)
    cut = rel_tol * top
    inv = np.where(w > cut, 1.0 / np.sqrt(np.clip(w, cut if cut > 0 else 1.0, None)), 0.0)
    if top == 0.0:
        inv = np.zeros_like(w)
    return (v * inv) @ dag(v)


def support_projector(a: np.ndarray, rel_tol: float) -> np.ndarray:
    w, v = np.linalg.eigh(herm_part(a))
    top = max(float(w[-1]), 0.0)
    keep = w > rel_tol * top if top > 0 else np.zeros_like(w, dtype=bool)
    return (v[:, keep]) @ dag(v[:, keep])


def sign_operator(a: np.ndarray) -> np.ndarray:
    """Hermitian sign of a Hermitian matrix (zero eigenvalues count as +1)."""
    w, v = np.linalg.eigh(herm_part(a))
    s = np.where(w >= 0, 1.0, -1.0)
    return (v * s) @ dag(v)


def vec_row(k: np.ndarray) -> np.ndarray:
    """Row-major flattening; matches the out-(x)-in Choi index convention."""
    return k.reshape(-1)


def unvec_row(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    return v.reshape(rows, cols)


def su2_from_rotation(r: np.ndarray) -> np.ndarray:
    """SU(2) element whose Bloch-sphere conjugation action equals ``r``.

    ``r`` must be in SO(3); the result is fixed up to global sign, resolved
    towards a non-negative real trace.
    """
    from scipy.spatial.transform import Rotation

    x, y, z, w = Rotation.from_matrix(np.asarray(r, dtype=float)).as_quat()
    u = w * I2 - 1j * (x * PAULI_X + y * PAULI_Y + z * PAULI_Z)
    if np.real(np.trace(u)) < 0:
        u = -u
    return u


def rotation_from_su2(u: np.ndarray) -> np.ndarray:
    """SO(3) matrix of the Bloch action rho -> u rho u^dag."""
    r = np.empty((3, 3))
    for j, pj in enumerate(PAULIS[1:]):
        for k, pk in enumerate(PAULIS[1:]):
            r[j, k] = 0.5 * np.real(np.trace(pj @ u @ pk @ dag(u)))
    return r


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    return np.array([np.real(np.trace(p @ rho)) for p in PAULIS[1:]])


def bloch_state(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return 0.5 * (I2 + r[0] * PAULI_X + r[1] * PAULI_Y + r[2] * PAULI_Z)


def pure_state_from_bloch(r) -> np.ndarray:
    """Unit vector of the qubit pure state with unit Bloch vector ``r``."""
    r = np.asarray(r, dtype=float)
    r = r / np.linalg.norm(r)
    w, v = np.linalg.eigh(bloch_state(r))
    return v[:, int(np.argmax(w))]
