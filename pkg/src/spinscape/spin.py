"""Dense operators on (C^2)^N.

Basis convention: site 1 is the most significant bit and bit value 0 is spin up,
so sigma^z = diag(1, -1) and kron(A_1, ..., A_N) places A_1 on site 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

MAX_SITES = 12

SIGMA = {
    "0": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
ALPHAS = ("0", "x", "y", "z")

PERM = np.eye(4, dtype=complex)[[0, 2, 1, 3]]


@dataclass(frozen=True, eq=False)
class ChainOperator:
    n_sites: int
    matrix: np.ndarray

    def __post_init__(self):
        check_sites(self.n_sites)
        dim = 2**self.n_sites
        if self.matrix.shape != (dim, dim):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match {self.n_sites} sites")

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def to_json(self) -> dict:
        rows = [[{"re": float(z.real), "im": float(z.imag)} for z in row] for row in self.matrix]
        return {"n_sites": self.n_sites, "rows": rows}

    @classmethod
    def from_json(cls, obj: dict) -> ChainOperator:
        m = np.array([[e["re"] + 1j * e["im"] for e in row] for row in obj["rows"]], dtype=complex)
        return cls(int(obj["n_sites"]), m)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), default=repr)


def check_sites(n: int) -> None:
    if not 1 <= n <= MAX_SITES:
        raise ValueError(f"n_sites must be in [1, {MAX_SITES}], got {n}")


def pauli(alpha: str | int) -> np.ndarray:
    key = {0: "0", 1: "x", 2: "y", 3: "z"}.get(alpha, alpha)
    return SIGMA[key].copy()


def sigma_sq(alpha: str | int) -> np.ndarray:
    s = pauli(alpha)
    return np.kron(s, s)


def embed_one_site(op: np.ndarray, i: int, n: int) -> np.ndarray:
    """op on site i (1-based)."""
    check_sites(n)
    if not 1 <= i <= n:
        raise ValueError(f"site {i} out of range for {n} sites")
    return np.kron(np.kron(np.eye(2 ** (i - 1)), op), np.eye(2 ** (n - i)))


def embed_two_site(op: np.ndarray, i: int, j: int, n: int) -> np.ndarray:
    """op on the ordered pair of sites (i, j), identity elsewhere; i > j is allowed."""
    check_sites(n)
    if i == j or not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"invalid site pair ({i}, {j}) for {n} sites")
    op = np.asarray(op, dtype=complex)
    rest = [k for k in range(1, n + 1) if k not in (i, j)]
    full = np.kron(op, np.eye(2 ** (n - 2))).reshape([2] * (2 * n))
    # axes are currently ordered (i, j, rest...) for rows and for columns
    order = [i, j] + rest
    perm = [order.index(k) for k in range(1, n + 1)]
    full = full.transpose(perm + [n + p for p in perm])
    return full.reshape(2**n, 2**n)


def embed_product(ops: dict[int, np.ndarray], n: int) -> np.ndarray:
    """Tensor product of single-site operators, identity on the remaining sites."""
    out = np.ones((1, 1), dtype=complex)
    for k in range(1, n + 1):
        out = np.kron(out, ops.get(k, SIGMA["0"]))
    return out


def permutation(i: int, j: int, n: int) -> np.ndarray:
    return embed_two_site(PERM, i, j, n)


def f_alpha(alpha: str | int) -> np.ndarray:
    """F^alpha = 1 - P sigma^alpha (x) sigma^alpha."""
    return np.eye(4) - PERM @ sigma_sq(alpha)


def f_xx() -> np.ndarray:
    """Hopping interaction (F^0 - F^z)/2 = -(xx + yy)/2."""
    return (f_alpha("0") - f_alpha("z")) / 2


def f_diag() -> np.ndarray:
    """Diagonal interaction (F^0 + F^z)/2 = (1 - zz)/2."""
    return (f_alpha("0") + f_alpha("z")) / 2


def rotation_u() -> np.ndarray:
    return np.array([[1, -1], [1, 1]], dtype=complex) / np.sqrt(2)


def u_tensor(n: int) -> np.ndarray:
    return embed_product({k: rotation_u() for k in range(1, n + 1)}, n)


def conjugate_by_u_tensor(op: np.ndarray, n: int | None = None) -> np.ndarray:
    """U^{(x)n} op U^{-(x)n}."""
    op = np.asarray(op)
    n = n or int(round(np.log2(op.shape[0])))
    u = u_tensor(n)
    return u @ op @ u.conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    return a @ b - b @ a


def frobenius(a: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(a)))


def relative_commutator_residual(a: np.ndarray, b: np.ndarray) -> float:
    den = frobenius(a) * frobenius(b)
    num = frobenius(commutator(a, b))
    return 0.0 if den == 0 else num / den


def sort_spectrum(vals) -> np.ndarray:
    vals = np.asarray(vals, dtype=complex)
    key = np.round(vals.real, 12), np.round(vals.imag, 12)
    return vals[np.lexsort((key[1], key[0]))]


def spectrum(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if a.shape[0] > 4096:
        raise ValueError("spectrum is limited to dimension 4096")
    return sort_spectrum(np.linalg.eigvals(a))


def spectrum_distance(s1, s2) -> float:
    """Max distance after optimal matching of the two multisets.

    Sorted-pair comparison is fragile for near-degenerate complex eigenvalues, so
    the matching is done by a linear assignment on |l1 - l2|.
    """
    from scipy.optimize import linear_sum_assignment

    s1, s2 = np.asarray(s1, dtype=complex), np.asarray(s2, dtype=complex)
    if s1.shape != s2.shape:
        raise ValueError("spectra of different size")
    cost = np.abs(s1[:, None] - s2[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max()) if len(r) else 0.0


# adjacent two-site operators applied to dense matrices without forming the embedding


def apply_left(op: np.ndarray, k: int, m: np.ndarray, n: int) -> np.ndarray:
    """embed(op, k, k+1) @ m for a 4x4 op, or a stack of 2^(k-1) ops keyed by the sites left of k."""
    d = m.shape[1]
    t = m.reshape(2 ** (k - 1), 4, 2 ** (n - k - 1), d)
    if op.ndim == 2:
        return np.einsum("ab,pbrd->pard", op, t).reshape(m.shape)
    return np.einsum("pab,pbrd->pard", op, t).reshape(m.shape)


def apply_right(m: np.ndarray, op: np.ndarray, k: int, n: int) -> np.ndarray:
    """m @ embed(op, k, k+1), same stacking convention as apply_left."""
    d = m.shape[0]
    t = m.reshape(d, 2 ** (k - 1), 4, 2 ** (n - k - 1))
    if op.ndim == 2:
        return np.einsum("dpbr,ba->dpar", t, op).reshape(m.shape)
    return np.einsum("dpbr,pba->dpar", t, op).reshape(m.shape)


def prefix_weights(k: int) -> np.ndarray:
    """Total sigma^z eigenvalue of sites 1..k-1 for each of their 2^(k-1) configurations."""
    if k <= 1:
        return np.zeros(1)
    bits = (np.arange(2 ** (k - 1))[:, None] >> np.arange(k - 2, -1, -1)) & 1
    return (1 - 2 * bits).sum(axis=1).astype(float)
