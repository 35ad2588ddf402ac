"""Component projections and inter-set correlation (ISC).

ISC measures how correlated one projected component is across data sets:
the sum of between-set covariances of the component signals over all
ordered pairs of distinct sets, divided by (N - 1) times the summed
within-set variances. The 1/(N - 1) factor normalizes the maximum to 1.

Everything here works directly on signals or on covariance blocks, with no
reference to the eigensolver, so the solver's analytic correlations can be
cross-validated against these independent computations.
"""

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .data import MultiSetData, block_slices
from .errors import DimensionError, UndefinedIscError

if TYPE_CHECKING:
    from .solver import MccaModel

# Signals whose variation falls below this fraction of their magnitude are
# treated as constant; correlation is meaningless below roundoff.
VARIANCE_FLOOR_REL = 1e-12


@dataclass(frozen=True)
class Projections:
    """Per-set component signals: one T x K block per data set."""

    signals: tuple

    def __post_init__(self):
        shapes = {s.shape for s in self.signals}
        if len(self.signals) < 2 or len(shapes) != 1:
            raise DimensionError(
                f"projections need >= 2 sets with a common T x K shape, got "
                f"{[s.shape for s in self.signals]}"
            )

    @property
    def n_sets(self) -> int:
        return len(self.signals)

    @property
    def n_exemplars(self) -> int:
        return self.signals[0].shape[0]

    @property
    def n_components(self) -> int:
        return self.signals[0].shape[1]


@dataclass(frozen=True)
class IscBreakdown:
    """Between-set covariance sum, within-set variance sum, and their ratio."""

    r_between: float
    r_within: float
    rho: float


def transform(model: "MccaModel", data: MultiSetData) -> Projections:
    """Project multi-set data through a fitted model.

    The model's training means are subtracted before projecting, so new raw
    data is handled the same way the training data was. Data that was
    centered by its own means is shifted back onto the training means first.
    """
    if data.dims != model.dims:
        for l, (have, want) in enumerate(zip(data.dims, model.dims)):
            if have != want:
                raise DimensionError(
                    f"data set {l + 1} has {have} features, model expects {want}"
                )
        raise DimensionError(
            f"data has {data.n_sets} sets, model expects {len(model.dims)}"
        )
    signals = []
    slices = block_slices(model.dims)
    for l, block in enumerate(data.sets):
        offset = -model.means[l]
        if data.centered:
            offset = offset + data.means[l]
        signals.append((block + offset) @ model.V[slices[l], :])
    return Projections(signals=tuple(signals))


def isc(proj: Projections, n: int) -> IscBreakdown:
    """ISC of component ``n`` (0-based), from the signals themselves.

    Signals are re-centered by their own sample means, making the metric
    self-contained on held-out data. The between-set sum runs over ordered
    pairs (l, k), l != k, so each unordered pair contributes twice.
    """
    if not 0 <= n < proj.n_components:
        raise DimensionError(
            f"component index {n} out of range for {proj.n_components} components"
        )
    y = np.column_stack([s[:, n] for s in proj.signals])
    n_sets = y.shape[1]
    yc = y - y.mean(axis=0)
    gram = yc.T @ yc
    r_within = float(np.trace(gram))
    r_between = float(gram.sum()) - r_within
    scale = float(np.abs(y).max())
    floor = (VARIANCE_FLOOR_REL * scale) ** 2 * y.size
    if r_within <= floor:
        raise UndefinedIscError(
            "within-set variance is zero (all sets constant); ISC undefined"
        )
    rho = r_between / ((n_sets - 1) * r_within)
    return IscBreakdown(r_between=r_between, r_within=r_within, rho=rho)


def isc_from_cov(cov, v) -> IscBreakdown:
    """ISC of one projection vector, evaluated from covariance blocks.

    ``v`` is the concatenation of the per-set projection vectors. The
    between-set part sums v_l' R_lk v_k over ordered pairs l != k and the
    within-set part sums the diagonal-block quadratic forms; the result
    matches :func:`isc` applied to the projected signals.
    """
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.shape[0] != cov.total_dim:
        raise DimensionError(
            f"projection vector has length {v.shape[0]}, expected {cov.total_dim}"
        )
    if not np.isfinite(v).all():
        raise UndefinedIscError("projection vector contains non-finite values")
    slices = block_slices(cov.dims)
    parts = [v[sl] for sl in slices]
    n_sets = cov.n_sets
    r_within = 0.0
    r_total = 0.0
    for l in range(n_sets):
        for k in range(n_sets):
            q = float(parts[l] @ cov.blocks[l][k] @ parts[k])
            r_total += q
            if l == k:
                r_within += q
    r_between = r_total - r_within
    floor = (
        VARIANCE_FLOOR_REL**2
        * float(np.abs(cov.R).max())
        * float(v @ v)
        * cov.total_dim
    )
    if r_within <= floor:
        raise UndefinedIscError("projected within-set variance is zero; ISC undefined")
    rho = r_between / ((n_sets - 1) * r_within)
    return IscBreakdown(r_between=r_between, r_within=r_within, rho=rho)
