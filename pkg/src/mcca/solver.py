"""Fitting shared correlated components across N data sets.

Both routes solve the same generalized symmetric eigenproblem
R v = D v lambda, where R is the covariance of the concatenated centered
data and D its block diagonal. Eigenvalues relate to the inter-set
correlation by lambda = (N - 1) rho + 1, so sorting descending puts the
most correlated component first, and the eigenvectors jointly diagonalize
D, which makes the component signals within each set mutually uncorrelated.

* The two-step route (default) whitens each set by its own
  eigendecomposition, optionally dropping near-null directions, and then
  runs a second symmetric eigendecomposition on the whitened concatenated
  covariance. It never inverts anything ill-conditioned and is the
  numerically safe choice.
* The one-step route forms inv(D) R explicitly and hands it to the general
  real eigensolver. It requires D to be positive definite and is kept as a
  faithful, independent cross-check of the two-step results.

Optional ridge shrinkage with ``gamma > 0`` adds gamma * I to every
diagonal block (in both R and D), which regularizes the pencil without
touching the cross-covariances.
"""

from dataclasses import dataclass

import numpy as np

from .data import CovarianceBlocks, MultiSetData, block_slices, covariance
from .errors import (
    DataError,
    DegeneracyError,
    DegenerateSetError,
    DimensionError,
    RankDeficiencyError,
    UndefinedIscError,
)
from .linalg import fix_column_signs, general_eig_real, sym_eig
from .metrics import isc_from_cov

# Relative eigenvalue threshold below which a diagonal block counts as
# singular for the one-step route.
PD_RTOL = 1e-10
# Eigenvalues closer than this fraction of the largest one are treated as a
# degenerate cluster; any orthogonal basis of the cluster's eigenspace is
# acceptable, so the basis is fixed deterministically.
TIE_RTOL = 1e-10

DEFAULT_RANK_TOL = 1e-9

TWO_STEP = "two-step"
ONE_STEP = "one-step"


@dataclass(frozen=True)
class RegularizationRecord:
    """How the fit guarded against rank deficiency.

    ``rank_tol`` is None for the one-step route, which truncates nothing;
    ``ranks`` lists the per-set retained dimensionality.
    """

    gamma: float
    rank_tol: float | None
    ranks: tuple


@dataclass(frozen=True)
class MccaModel:
    """Fitted projections and their correlation spectrum.

    ``V`` stacks the per-set projection blocks (d_l rows each); column n is
    component n. Columns are sorted by descending eigenvalue, normalized to
    v' D v = 1 against the (gamma-regularized) block diagonal, and jointly
    diagonalize it: V' D V = I up to roundoff. ``rho_analytic`` is
    (lambda - 1)/(N - 1) of the solved problem; ``rho_empirical`` is the
    inter-set correlation each column achieves on the unregularized
    covariance (NaN in the corner case of zero projected variance).
    """

    V: np.ndarray
    lambdas: np.ndarray
    rho_analytic: np.ndarray
    rho_empirical: np.ndarray
    dims: tuple
    means: tuple
    method: str
    reg: RegularizationRecord

    @property
    def n_components(self) -> int:
        return int(self.lambdas.shape[0])

    @property
    def n_sets(self) -> int:
        return len(self.dims)

    def set_block(self, l: int) -> np.ndarray:
        """The d_l x K projection block of data set ``l`` (0-based)."""
        return self.V[block_slices(self.dims)[l], :]


@dataclass(frozen=True)
class WhitenedBasis:
    """Per-set eigenstructure used to whiten the block diagonal.

    ``maps[l]`` sends set l's features to its retained whitened
    coordinates, and ``rtilde`` is the covariance of the whitened
    concatenated data; its diagonal blocks are identities by construction.
    """

    eigvecs: tuple
    eigvals: tuple
    ranks: tuple
    maps: tuple
    rtilde: np.ndarray


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def _check_opts(gamma: float, rank_tol: float | None) -> None:
    if not (np.isfinite(gamma) and gamma >= 0.0):
        raise DataError(f"gamma must be a finite value >= 0, got {gamma}")
    if rank_tol is not None and not 0.0 < rank_tol < 1.0:
        raise DataError(f"rank_tol must lie strictly between 0 and 1, got {rank_tol}")


def whiten(cov: CovarianceBlocks, rank_tol: float = DEFAULT_RANK_TOL, gamma: float = 0.0) -> WhitenedBasis:
    """Eigendecompose each diagonal block and build whitening maps.

    Directions whose eigenvalue is at most ``rank_tol`` times the block's
    largest eigenvalue are dropped. A set whose block has no retained
    direction at all raises :class:`DegenerateSetError` naming the set.
    """
    _check_opts(gamma, rank_tol)
    eigvecs, eigvals, ranks, maps = [], [], [], []
    for l in range(cov.n_sets):
        block = cov.blocks[l][l] + gamma * np.eye(cov.dims[l])
        e = sym_eig(block, name=f"diagonal block of set {l + 1}")
        if e.values[0] <= 0.0:
            raise DegenerateSetError(l + 1, cov.n_sets, "its covariance block is zero")
        r = int(np.count_nonzero(e.values > rank_tol * e.values[0]))
        if r == 0:
            raise DegenerateSetError(
                l + 1, cov.n_sets, "all variance falls below the rank tolerance"
            )
        eigvecs.append(e.vectors)
        eigvals.append(e.values)
        ranks.append(r)
        maps.append(e.vectors[:, :r] / np.sqrt(e.values[:r]))
    slices = block_slices(cov.dims)
    wslices = block_slices(ranks)
    total = sum(ranks)
    rtilde = np.empty((total, total))
    for l in range(cov.n_sets):
        for k in range(cov.n_sets):
            block = cov.blocks[l][k]
            if l == k:
                block = block + gamma * np.eye(cov.dims[l])
            rtilde[wslices[l], wslices[k]] = maps[l].T @ block @ maps[k]
    rtilde = 0.5 * (rtilde + rtilde.T)
    return WhitenedBasis(
        eigvecs=tuple(_freeze(u) for u in eigvecs),
        eigvals=tuple(_freeze(w) for w in eigvals),
        ranks=tuple(ranks),
        maps=tuple(_freeze(m) for m in maps),
        rtilde=_freeze(rtilde),
    )


def fit_two_step(
    cov: CovarianceBlocks,
    rank_tol: float = DEFAULT_RANK_TOL,
    gamma: float = 0.0,
    k: int | None = None,
) -> MccaModel:
    """Fit by whitening each set, then eigendecomposing the whitened covariance.

    Parameters
    ----------
    cov : CovarianceBlocks
        Covariance blocks of the (centered) training data.
    rank_tol : float
        Relative eigenvalue cutoff for per-set rank truncation.
    gamma : float
        Ridge added to every diagonal block before whitening.
    k : int, optional
        Number of components to keep; defaults to everything retained by
        the truncation. Asking for more than that is an error.

    Returns
    -------
    MccaModel
    """
    wb = whiten(cov, rank_tol=rank_tol, gamma=gamma)
    e = sym_eig(wb.rtilde, name="whitened covariance")
    total = int(e.values.shape[0])
    v = np.zeros((cov.total_dim, total))
    slices = block_slices(cov.dims)
    wslices = block_slices(wb.ranks)
    for l in range(cov.n_sets):
        v[slices[l], :] = wb.maps[l] @ e.vectors[wslices[l], :]
    reg = RegularizationRecord(gamma=float(gamma), rank_tol=float(rank_tol), ranks=wb.ranks)
    return _finish(cov, e.values.copy(), v, k, TWO_STEP, reg)


def fit_one_step(
    cov: CovarianceBlocks,
    gamma: float = 0.0,
    k: int | None = None,
) -> MccaModel:
    """Fit from the eigenvectors of inv(D) R.

    Requires every (gamma-shifted) diagonal block to be positive definite;
    otherwise a :class:`RankDeficiencyError` points at the failing set and
    suggests the two-step route or ``gamma > 0``. Kept primarily as an
    independent cross-check of :func:`fit_two_step`.
    """
    _check_opts(gamma, None)
    n_sets = cov.n_sets
    slices = block_slices(cov.dims)
    inverses = []
    for l in range(n_sets):
        block = cov.blocks[l][l] + gamma * np.eye(cov.dims[l])
        e = sym_eig(block, name=f"diagonal block of set {l + 1}")
        if e.values[0] <= 0.0 or e.values[-1] <= PD_RTOL * e.values[0]:
            raise RankDeficiencyError(
                f"diagonal covariance block of data set {l + 1} is singular "
                f"(smallest eigenvalue {e.values[-1]:.3e} vs largest "
                f"{e.values[0]:.3e}); use fit_two_step or gamma > 0"
            )
        inverses.append((e.vectors / e.values) @ e.vectors.T)
    r_reg = cov.R + gamma * np.eye(cov.total_dim)
    m = np.empty_like(r_reg)
    for l in range(n_sets):
        m[slices[l], :] = inverses[l] @ r_reg[slices[l], :]
    values, vectors = general_eig_real(m)
    reg = RegularizationRecord(gamma=float(gamma), rank_tol=None, ranks=cov.dims)
    return _finish(cov, values, vectors, k, ONE_STEP, reg)


def fit(
    data: MultiSetData,
    method: str = TWO_STEP,
    rank_tol: float = DEFAULT_RANK_TOL,
    gamma: float = 0.0,
    k: int | None = None,
) -> MccaModel:
    """Center ``data``, form covariance blocks, and fit with ``method``."""
    cov = covariance(data)
    if method == TWO_STEP:
        return fit_two_step(cov, rank_tol=rank_tol, gamma=gamma, k=k)
    if method == ONE_STEP:
        return fit_one_step(cov, gamma=gamma, k=k)
    raise DataError(f"unknown method {method!r}; expected {TWO_STEP!r} or {ONE_STEP!r}")


def stationarity_residual(cov: CovarianceBlocks, model: MccaModel, n: int) -> float:
    """How far component ``n`` is from satisfying the optimality condition.

    At a solution, the averaged cross-covariance response of every set
    equals rho times its own-covariance response:
    (N - 1)^-1 sum_{k != l} R_lk v_k = (R_ll + gamma I) v_l rho.
    Returns the worst per-set max-norm violation, normalized by the largest
    covariance entry and the vector's max-norm; near zero at a true
    solution.
    """
    if not 0 <= n < model.n_components:
        raise DimensionError(
            f"component index {n} out of range for {model.n_components} components"
        )
    if cov.dims != model.dims:
        raise DimensionError("covariance dims do not match model dims")
    gamma = model.reg.gamma
    rho = float(model.rho_analytic[n])
    slices = block_slices(cov.dims)
    parts = [model.V[sl, n] for sl in slices]
    n_sets = cov.n_sets
    worst = 0.0
    scale = max(float(np.abs(cov.R).max()), gamma)
    for l in range(n_sets):
        acc = np.zeros(cov.dims[l])
        for k in range(n_sets):
            if k == l:
                continue
            acc += cov.blocks[l][k] @ parts[k]
        own = cov.blocks[l][l] @ parts[l] + gamma * parts[l]
        g = acc / (n_sets - 1) - own * rho
        worst = max(worst, float(np.abs(g).max()))
    vinf = float(np.abs(model.V[:, n]).max())
    return worst / max(scale * vinf, np.finfo(np.float64).tiny)


def _finish(
    cov: CovarianceBlocks,
    values: np.ndarray,
    vectors: np.ndarray,
    k: int | None,
    method: str,
    reg: RegularizationRecord,
) -> MccaModel:
    """Normalize, fix degenerate clusters, truncate to k, and wrap up."""
    d_reg = cov.D + reg.gamma * np.eye(cov.total_dim)
    q = np.einsum("ij,ij->j", vectors, d_reg @ vectors)
    if np.any(q <= 0.0):
        raise DegeneracyError("eigenvector with non-positive block-diagonal energy")
    vectors = vectors / np.sqrt(q)
    _orthonormalize_ties(values, vectors, d_reg)
    fix_column_signs(vectors)

    available = int(values.shape[0])
    if k is None:
        k = available
    if not 1 <= k <= available:
        raise DimensionError(
            f"requested {k} components but only {available} are available"
        )
    values = values[:k]
    vectors = np.ascontiguousarray(vectors[:, :k])

    rho_a = (values - 1.0) / (cov.n_sets - 1)
    rho_e = np.empty_like(rho_a)
    for n in range(k):
        try:
            rho_e[n] = isc_from_cov(cov, vectors[:, n]).rho
        except UndefinedIscError:
            rho_e[n] = np.nan
    return MccaModel(
        V=_freeze(vectors),
        lambdas=_freeze(values.copy()),
        rho_analytic=_freeze(rho_a),
        rho_empirical=_freeze(rho_e),
        dims=cov.dims,
        means=cov.means,
        method=method,
        reg=reg,
    )


def _orthonormalize_ties(values: np.ndarray, vectors: np.ndarray, d_reg: np.ndarray) -> None:
    """Make near-degenerate clusters D-orthonormal, in place.

    Eigenvectors for well-separated eigenvalues of the symmetric pencil are
    D-orthogonal automatically; within a degenerate cluster the backend's
    basis is arbitrary, so a symmetric orthogonalization pins it down
    without leaving the cluster's eigenspace.
    """
    n = values.shape[0]
    tol = TIE_RTOL * max(abs(float(values[0])), abs(float(values[-1])))
    start = 0
    for i in range(1, n + 1):
        if i < n and values[i - 1] - values[i] <= tol:
            continue
        if i - start > 1:
            vc = vectors[:, start:i]
            gram = vc.T @ d_reg @ vc
            gram = 0.5 * (gram + gram.T)
            w, qmat = np.linalg.eigh(gram)
            if w[0] <= 1e-12 * w[-1]:
                raise DegeneracyError(
                    "linearly dependent eigenvectors in a degenerate cluster"
                )
            vectors[:, start:i] = vc @ (qmat / np.sqrt(w)) @ qmat.T
        start = i
