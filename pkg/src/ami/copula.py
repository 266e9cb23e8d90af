"""Rank transforms to copula pseudo-observations and the copula-density fit.

Mutual information between two continuous variables equals the expected log
copula density of their rank transforms, so the bivariate sample is mapped to
(0,1)^2 and the density is fitted there on a padded unit square.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy.stats import rankdata

from .density import sce_fit
from .grid import DensityEstimate, GridConfig, UNIT_SQUARE_PADDING

__all__ = [
    "PseudoObservations",
    "ecdf_transform",
    "transform_with_reference",
    "pseudo_observations",
    "fit_copula_density",
]


@dataclass(frozen=True)
class PseudoObservations:
    """Rank-based coordinates of a paired sample on (0,1)^2."""

    u: np.ndarray
    v: np.ndarray
    source_ids: np.ndarray
    transform: str = "rank/(n+1)"

    def __post_init__(self) -> None:
        for a in (self.u, self.v):
            if np.any((a <= 0.0) | (a >= 1.0)):
                raise ValueError("pseudo-observations must lie strictly inside (0,1)")

    @property
    def pairs(self) -> np.ndarray:
        return np.column_stack([self.u, self.v])


def _as_vector(values: ArrayLike, name: str = "values") -> np.ndarray:
    a = np.asarray(values, dtype=float).ravel()
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite")
    return a


def ecdf_transform(values: ArrayLike) -> np.ndarray:
    """Interiorized empirical CDF transform, rank/(n+1) with midranks for ties.

    Keeps every coordinate strictly inside (0,1) so downstream log copula
    densities stay finite; without ties, the output is a permutation of
    ``{1/(n+1), ..., n/(n+1)}``.
    """
    a = _as_vector(values)
    n = a.size
    if n < 2:
        raise ValueError("need at least two values for an ECDF transform")
    if a.max() == a.min():
        warnings.warn("all values identical; ECDF transform is degenerate", RuntimeWarning, stacklevel=2)
    return rankdata(a, method="average") / (n + 1.0)


def transform_with_reference(new_values: ArrayLike, reference_values: ArrayLike) -> np.ndarray:
    """Reference-sample ECDF evaluated at new points, shrunk to the interior.

    Returns ``(#{ref <= x} + 0.5) / (n_ref + 1)``, so a point below every
    reference maps to ``0.5/(n_ref+1)`` and one above every reference to
    ``(n_ref+0.5)/(n_ref+1)``.  Used to carry a held-out sample through the
    transforms frozen on the fitting split.
    """
    new = _as_vector(new_values, "new_values")
    ref = _as_vector(reference_values, "reference_values")
    if ref.size == 0:
        raise ValueError("reference sample is empty")
    counts = np.searchsorted(np.sort(ref), new, side="right")
    return (counts + 0.5) / (ref.size + 1.0)


def pseudo_observations(x: ArrayLike, y: ArrayLike) -> PseudoObservations:
    """Paired rank transform of a bivariate sample."""
    xv = _as_vector(x, "x")
    yv = _as_vector(y, "y")
    if xv.size != yv.size:
        raise ValueError("x and y must be paired")
    return PseudoObservations(
        u=ecdf_transform(xv), v=ecdf_transform(yv), source_ids=np.arange(xv.size)
    )


def fit_copula_density(
    pseudo: PseudoObservations | ArrayLike,
    grid: GridConfig | None = None,
    mode: str = "auto",
    points_per_dim: int | None = None,
) -> DensityEstimate:
    """Fit the copula density on the padded unit square.

    The estimate is computed on ``[-delta, 1+delta]^2`` and renormalized to
    unit mass over ``[0,1]^2``; evaluating it outside the unit square is an
    error.  The padding default (0.375) deliberately differs from the
    data-driven grids: with a padded length of 1.5 every third frequency node
    would sit exactly on a spectral null of a [0,1]-supported density (nulls
    at multiples of 2*pi), cutting off the contiguous low-pass filter far too
    early and visibly over-smoothing the fit.

    Comonotone (or anti-comonotone) pairs make the true copula density
    unbounded on a diagonal; this degenerate case is warned about.
    """
    if not isinstance(pseudo, PseudoObservations):
        arr = np.asarray(pseudo, dtype=float)
        pseudo = PseudoObservations(
            u=arr[:, 0], v=arr[:, 1], source_ids=np.arange(arr.shape[0])
        )
    if pseudo.u.size < 4:
        raise ValueError("need at least 4 pseudo-observation pairs")
    ru = np.argsort(np.argsort(pseudo.u))
    rv = np.argsort(np.argsort(pseudo.v))
    if np.array_equal(ru, rv) or np.array_equal(ru, ru.size - 1 - rv):
        warnings.warn(
            "pseudo-observations are perfectly (anti)monotone; the copula density "
            "is unbounded and the fit is degenerate",
            RuntimeWarning,
            stacklevel=2,
        )
    if grid is None:
        grid = GridConfig.unit_square(
            points_per_dim=points_per_dim if points_per_dim else 256,
            padding_factor=UNIT_SQUARE_PADDING,
        )
    return sce_fit(
        pseudo.pairs,
        grid=grid,
        mode=mode,
        eval_lower=(0.0, 0.0),
        eval_upper=(1.0, 1.0),
    )
