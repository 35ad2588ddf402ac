"""Multi-set data containers, mean-centering, and covariance block assembly.

A "multi-set" holds N >= 2 data sets observed over the same T exemplars;
set l contributes a T x d_l block. Covariances are unnormalized sums over
exemplars (no 1/(T-1) factor): correlations and the eigenstructure built on
top are invariant to that common scale, and keeping raw sums makes the
block algebra exact for integer test fixtures.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionError
from .linalg import SYMMETRY_RTOL


def block_slices(dims) -> list[slice]:
    """Column slices of the concatenated layout for per-set dims."""
    out = []
    offset = 0
    for d in dims:
        out.append(slice(offset, offset + d))
        offset += d
    return out


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class MultiSetData:
    """N data sets over shared exemplars.

    ``sets[l]`` is a T x d_l block with exemplars as rows. ``means`` holds
    the per-set row vectors that were subtracted when ``centered`` is true;
    it is ``None`` for raw data.
    """

    sets: tuple
    means: tuple | None
    centered: bool

    @property
    def n_sets(self) -> int:
        return len(self.sets)

    @property
    def n_exemplars(self) -> int:
        return self.sets[0].shape[0]

    @property
    def dims(self) -> tuple:
        return tuple(b.shape[1] for b in self.sets)

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    def concatenated(self) -> np.ndarray:
        """The T x total_dim matrix with set blocks side by side."""
        return np.hstack(self.sets)


def load(sets) -> MultiSetData:
    """Validate and store raw multi-set data.

    Every block must share the exemplar count T >= 2, have at least one
    column, and contain only finite values. At least two sets are required;
    inter-set correlation needs pairs of distinct sets.
    """
    blocks = list(sets)
    if len(blocks) < 2:
        raise DimensionError(f"need at least 2 data sets, got {len(blocks)}")
    out = []
    t = None
    for l, block in enumerate(blocks):
        arr = np.array(block, dtype=np.float64, order="C", copy=True)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[1] < 1:
            raise DimensionError(f"data set {l + 1} must be a T x d matrix with d >= 1")
        if t is None:
            t = arr.shape[0]
        elif arr.shape[0] != t:
            raise DimensionError(
                f"data set {l + 1} has {arr.shape[0]} exemplars, expected {t}"
            )
        if not np.isfinite(arr).all():
            raise DataError(f"data set {l + 1} contains non-finite values")
        out.append(_freeze(arr))
    if t < 2:
        raise DimensionError(f"need at least 2 exemplars, got {t}")
    return MultiSetData(sets=tuple(out), means=None, centered=False)


def center(data: MultiSetData) -> MultiSetData:
    """Subtract per-set column means, recording them for later reuse.

    Centering already-centered data is effectively a no-op: the freshly
    computed deltas are near zero and fold into the stored means.
    """
    blocks = []
    means = []
    for l, block in enumerate(data.sets):
        mu = block.mean(axis=0)
        base = data.means[l] if data.means is not None else np.zeros_like(mu)
        blocks.append(_freeze(block - mu))
        means.append(_freeze(base + mu))
    return MultiSetData(sets=tuple(blocks), means=tuple(means), centered=True)


@dataclass(frozen=True)
class CovarianceBlocks:
    """All cross-covariance blocks of a multi-set, plus their assemblies.

    ``blocks[l][k]`` is the d_l x d_k sum of outer products between centered
    sets l and k. ``R`` is the full total_dim x total_dim matrix of those
    blocks and ``D`` keeps only the diagonal blocks, zero elsewhere.
    ``means`` carries the training means so fitted models can be applied to
    new data.
    """

    blocks: tuple
    R: np.ndarray
    D: np.ndarray
    dims: tuple
    means: tuple

    @property
    def n_sets(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return sum(self.dims)


def covariance(data: MultiSetData) -> CovarianceBlocks:
    """Cross-covariance blocks of (internally centered) multi-set data.

    Each block is the plain sum over exemplars of centered outer products,
    computed as one Gram product of the centered concatenation and then
    symmetrized so R == R.T holds exactly.
    """
    if not data.centered:
        data = center(data)
    xc = data.concatenated()
    r = xc.T @ xc
    r = 0.5 * (r + r.T)
    return _assemble(r, data.dims, data.means)


def covariance_from_matrix(r, dims, means=None) -> CovarianceBlocks:
    """Build :class:`CovarianceBlocks` from an explicit covariance matrix.

    Handy when the covariance is specified directly rather than estimated
    from data, e.g. analytic test instances. ``r`` must be square with side
    ``sum(dims)`` and symmetric up to roundoff; ``means`` defaults to zeros.
    """
    r = np.array(r, dtype=np.float64, order="C", copy=True)
    dims = tuple(int(d) for d in dims)
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise DimensionError(f"need at least 2 sets with positive dims, got {dims}")
    total = sum(dims)
    if r.ndim != 2 or r.shape != (total, total):
        raise DimensionError(f"covariance must be {total}x{total}, got {r.shape}")
    if not np.isfinite(r).all():
        raise DataError("covariance contains non-finite values")
    asym = float(np.abs(r - r.T).max())
    scale = float(np.abs(r).max())
    if asym > SYMMETRY_RTOL * max(scale, 1e-300):
        raise DataError(f"covariance is not symmetric (max asymmetry {asym:.3e})")
    r = 0.5 * (r + r.T)
    if means is None:
        means = tuple(np.zeros(d) for d in dims)
    else:
        means = tuple(np.asarray(m, dtype=np.float64).reshape(-1) for m in means)
        if tuple(len(m) for m in means) != dims:
            raise DimensionError("means do not match dims")
    return _assemble(r, dims, means)


def _assemble(r: np.ndarray, dims, means) -> CovarianceBlocks:
    slices = block_slices(dims)
    d = np.zeros_like(r)
    grid = []
    for sl in slices:
        d[sl, sl] = r[sl, sl]
        grid.append(tuple(_freeze(np.ascontiguousarray(r[sl, sk])) for sk in slices))
    return CovarianceBlocks(
        blocks=tuple(grid),
        R=_freeze(r),
        D=_freeze(d),
        dims=tuple(dims),
        means=tuple(_freeze(np.array(m, dtype=np.float64, copy=True)) for m in means),
    )
