"""Dense complex linear algebra for small quantum systems.

States and operators are plain ``numpy`` arrays of dtype ``complex128``:
vectors have shape ``(d,)`` and matrices ``(d, d)``. Every function here is
pure; inputs are never modified.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from math import prod

import numpy as np

#: Largest total dimension any constructed matrix may have.
MAX_DIM = 2**16

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
NORM_TOL = 1e-10
PHASE_TOL = 1e-10


class DimensionError(ValueError):
    """A dimension is inconsistent or exceeds the configured maximum."""


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _as_square(a) -> np.ndarray:
    m = _as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return m


# --------------------------------------------------------------------------
# constants and constructors
# --------------------------------------------------------------------------

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
S = np.diag([1, 1j]).astype(np.complex128)
T = np.diag([1, np.exp(1j * np.pi / 4)]).astype(np.complex128)
CZ = np.diag([1, 1, 1, -1]).astype(np.complex128)

KET_0 = np.array([1, 0], dtype=np.complex128)
KET_1 = np.array([0, 1], dtype=np.complex128)
KET_PLUS = np.array([1, 1], dtype=np.complex128) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=np.complex128) / np.sqrt(2)


def rz(theta: float) -> np.ndarray:
    """``exp(-i Z theta / 2)``."""
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)]).astype(np.complex128)


def rx(theta: float) -> np.ndarray:
    """``exp(-i X theta / 2)``."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def z_rotation(theta: float) -> np.ndarray:
    """``exp(+i Z theta / 2)``, the rotation a wire measurement at angle theta implements."""
    return rz(-theta)


def dagger(a) -> np.ndarray:
    return np.asarray(a, dtype=np.complex128).conj().T


def projector(psi) -> np.ndarray:
    """Return ``|psi><psi|`` for a vector ``psi``."""
    v = np.asarray(psi, dtype=np.complex128).reshape(-1)
    return np.outer(v, v.conj())


def normalize(psi) -> np.ndarray:
    v = np.asarray(psi, dtype=np.complex128).reshape(-1)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("cannot normalize the zero vector")
    return v / n


def kron(a, b, max_dim: int | None = None) -> np.ndarray:
    """Tensor product of two matrices (or two vectors).

    Raises ``DimensionError`` when the result would exceed ``max_dim``
    (``MAX_DIM`` by default).
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != b.ndim or a.ndim not in (1, 2):
        raise DimensionError(f"cannot kron shapes {a.shape} and {b.shape}")
    limit = MAX_DIM if max_dim is None else max_dim
    if max(a.shape[k] * b.shape[k] for k in range(a.ndim)) > limit:
        raise DimensionError(
            f"kron of {a.shape} and {b.shape} exceeds maximum dimension {limit}"
        )
    return np.kron(a, b)


def kron_all(factors: Iterable, max_dim: int | None = None) -> np.ndarray:
    factors = list(factors)
    if not factors:
        raise ValueError("kron_all needs at least one factor")
    out = np.asarray(factors[0], dtype=np.complex128)
    for f in factors[1:]:
        out = kron(out, f, max_dim=max_dim)
    return out


# --------------------------------------------------------------------------
# reductions
# --------------------------------------------------------------------------


def partial_trace(rho, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``dims`` gives the local dimension of each subsystem in tensor order.
    Kept subsystems appear in the result in ascending index order.
    """
    rho = _as_square(rho)
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims) or prod(dims) != rho.shape[0]:
        raise DimensionError(
            f"subsystem dims {dims} do not match matrix dimension {rho.shape[0]}"
        )
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    if len(keep) == n:
        return rho.copy()
    traced = [k for k in range(n) if k not in keep]
    t = rho.reshape(dims + dims)
    # contract row and column index of each traced subsystem, highest axis first
    for k in sorted(traced, reverse=True):
        m = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + m)
    d_keep = prod(dims[k] for k in keep)
    return t.reshape(d_keep, d_keep)


def hermitian_eig(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues real and in
    descending order; column ``i`` of ``eigenvectors`` belongs to
    eigenvalue ``i``.
    """
    a = _as_square(a)
    if not is_hermitian(a):
        raise ValueError("hermitian_eig requires a Hermitian matrix")
    herm = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(herm)
    return w[::-1].copy(), v[:, ::-1].copy()


def trace_norm(a) -> float:
    """Schatten-1 norm: the sum of singular values (no factor of 1/2)."""
    a = _as_square(a)
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def trace_distance(a, b) -> float:
    """Half the trace norm of ``a - b``."""
    return 0.5 * trace_norm(_as_square(a) - _as_square(b))


# --------------------------------------------------------------------------
# predicates
# --------------------------------------------------------------------------


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a, dtype=np.complex128)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and bool(
        np.max(np.abs(a - a.conj().T), initial=0.0) <= tol
    )


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    err = u.conj().T @ u - np.eye(u.shape[0])
    return bool(np.max(np.abs(err), initial=0.0) <= tol)


def is_density(rho) -> bool:
    rho = np.asarray(rho, dtype=np.complex128)
    if not is_hermitian(rho):
        return False
    if abs(np.trace(rho) - 1) > TRACE_TOL:
        return False
    return bool(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] >= -PSD_TOL)


def is_normalized(psi, tol: float = NORM_TOL) -> bool:
    return abs(np.linalg.norm(np.asarray(psi)) - 1) <= tol


def overlap(a, b) -> float:
    """``|<a|b>|`` for two vectors."""
    return float(abs(np.vdot(np.asarray(a).reshape(-1), np.asarray(b).reshape(-1))))


def phase_equal(a, b, tol: float = PHASE_TOL) -> bool:
    """True when two normalized vectors agree up to a global phase."""
    return overlap(a, b) >= 1 - tol


def same_up_to_phase(a, b, tol: float = PHASE_TOL) -> bool:
    """True when two square matrices satisfy ``a = e^{i phi} b``."""
    a, b = _as_square(a), _as_square(b)
    if a.shape != b.shape:
        return False
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return na == nb
    return abs(np.vdot(a, b)) / (na * nb) >= 1 - tol


def pure_vector(rho, tol: float = PSD_TOL) -> np.ndarray:
    """Return a unit vector ``v`` with ``rho = |v><v|``; raise if ``rho`` is mixed."""
    rho = _as_square(rho)
    if not is_density(rho):
        raise ValueError("expected a density matrix")
    w, v = hermitian_eig(rho)
    if abs(w[0] - 1) > tol:
        raise ValueError(f"density matrix is not pure (largest eigenvalue {w[0]:.6g})")
    return v[:, 0]


# --------------------------------------------------------------------------
# serialization: complex literals are [re, im] pairs
# --------------------------------------------------------------------------


def _complex_from(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ValueError(f"complex literal must be [re, im], got {x!r}")
        return complex(float(x[0]), float(x[1]))
    return complex(float(x))


def matrix_from_json(rows) -> np.ndarray:
    """Parse a row-major array of ``[re, im]`` pairs (plain reals allowed)."""
    m = np.array([[_complex_from(e) for e in row] for row in rows], dtype=np.complex128)
    return _as_matrix(m)


def vector_from_json(entries) -> np.ndarray:
    v = np.array([_complex_from(e) for e in entries], dtype=np.complex128)
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def vector_to_json(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=np.complex128).reshape(-1)]
