"""Dense real-matrix helpers with reproducible eigendecompositions.

The heavy numerical work is delegated to LAPACK through numpy; this module
pins down the conventions everything else relies on: validated float64
inputs, eigenvalues sorted in descending order, and a deterministic sign
for every eigenvector column so repeated runs produce identical bits.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DegeneracyError, DimensionError

# Largest tolerated relative asymmetry before sym_eig refuses the input.
SYMMETRY_RTOL = 1e-10
# Imaginary parts above this fraction of the spectral scale mean the matrix
# was not similar to a symmetric one.
EIG_IMAG_RTOL = 1e-8


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a C-contiguous float64 2-D array with finite entries."""
    arr = np.ascontiguousarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got {arr.ndim}-D")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DimensionError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise DataError(f"{name} contains non-finite entries")
    return arr


def fix_column_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip signs in place so each column's largest-magnitude entry is positive.

    Ties resolve to the lowest row index, which removes the arbitrary sign
    freedom of eigenvector columns across platforms and backends.
    """
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        i = int(np.argmax(np.abs(col)))
        if col[i] < 0.0:
            # aliased np.negative(col, out=col) corrupts strided column
            # views on some numpy builds; in-place multiply is reliable
            col *= -1.0
    return vectors


@dataclass(frozen=True)
class SymEig:
    """Eigendecomposition of a symmetric matrix.

    ``values`` are sorted descending; column ``i`` of ``vectors`` pairs with
    ``values[i]`` and the columns form an orthonormal set.
    """

    values: np.ndarray
    vectors: np.ndarray


def sym_eig(a, name: str = "matrix") -> SymEig:
    """Full eigendecomposition of a symmetric matrix.

    The input must be square and symmetric to within ``SYMMETRY_RTOL``
    relative to its largest entry; it is symmetrized by averaging with its
    transpose before factorization, so tiny roundoff asymmetry is harmless.
    Output is deterministic for identical input bits.
    """
    a = as_matrix(a, name)
    n, m = a.shape
    if n != m:
        raise DimensionError(f"{name} must be square, got {n}x{m}")
    scale = float(np.abs(a).max())
    asym = float(np.abs(a - a.T).max())
    if asym > SYMMETRY_RTOL * scale:
        raise DataError(
            f"{name} is not symmetric: max asymmetry {asym:.3e} exceeds "
            f"{SYMMETRY_RTOL:.0e} of its largest entry {scale:.3e}"
        )
    sym = 0.5 * (a + a.T)
    w, q = np.linalg.eigh(sym)
    # eigh returns ascending order
    values = np.ascontiguousarray(w[::-1])
    vectors = np.ascontiguousarray(q[:, ::-1])
    fix_column_signs(vectors)
    return SymEig(values=values, vectors=vectors)


def matmul(a, b) -> np.ndarray:
    """Matrix product with explicit shape validation."""
    a = as_matrix(a, "left operand")
    b = as_matrix(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}"
        )
    return a @ b


def general_eig_real(a) -> tuple[np.ndarray, np.ndarray]:
    """Real eigenpairs of a square matrix similar to a symmetric one.

    Intended for products of an inverted positive-definite block diagonal
    with a full covariance, whose spectra are real by similarity. Uses the
    general LAPACK eigensolver so it stays an independent cross-check of the
    symmetric whitening route.

    Returns ``(values, vectors)`` with values descending and real vector
    columns. Conjugate pairs whose imaginary part is within
    ``EIG_IMAG_RTOL`` of the spectral scale are folded into two real columns
    spanning the same invariant subspace; larger imaginary parts raise
    :class:`DegeneracyError`, which signals that the upstream block diagonal
    was not positive definite.
    """
    a = as_matrix(a)
    n, m = a.shape
    if n != m:
        raise DimensionError(f"matrix must be square, got {n}x{m}")
    w, v = np.linalg.eig(a)
    if not np.iscomplexobj(w):
        values = w.astype(np.float64, copy=True)
        vectors = v.astype(np.float64, copy=True)
    else:
        scale = float(np.abs(w).max())
        worst = float(np.abs(w.imag).max())
        if worst > EIG_IMAG_RTOL * scale:
            raise DegeneracyError(
                f"complex eigenvalue detected (imag {worst:.3e} vs spectral "
                f"scale {scale:.3e}); the block diagonal is not positive definite"
            )
        values = w.real.copy()
        vectors = np.empty((n, n), dtype=np.float64)
        j = 0
        while j < n:
            if w.imag[j] != 0.0 and j + 1 < n:
                # LAPACK emits conjugate pairs adjacently; their real and
                # imaginary parts span the 2-D invariant subspace.
                vectors[:, j] = v[:, j].real
                vectors[:, j + 1] = v[:, j].imag
                values[j + 1] = values[j]
                j += 2
            else:
                vectors[:, j] = v[:, j].real
                j += 1
    order = np.argsort(-values, kind="stable")
    values = np.ascontiguousarray(values[order])
    vectors = np.ascontiguousarray(vectors[:, order])
    fix_column_signs(vectors)
    return values, vectors
