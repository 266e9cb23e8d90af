"""Spatial grids, frequency grids, and gridded-density containers.

The estimation pipeline works on regular power-of-two grids: densities are
represented by their values on the spatial nodes together with the Fourier
transform of the estimate on the conjugate frequency nodes.  Frequency-domain
arrays throughout the package use the *shifted* layout (frequencies ascending,
zero at index ``n // 2``), which keeps symmetry handling and flood filling
straightforward; the FFT-order shuffle happens only inside the transforms.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike

__all__ = [
    "GridConfig",
    "FrequencyGrid",
    "DensityEstimate",
    "density_at",
    "integrate_box",
]

DEFAULT_POINTS_1D = 1024
DEFAULT_POINTS_2D = 256
DEFAULT_PADDING = 0.25
#: padding used for copula fits on the unit square; 0.25 would put every third
#: frequency node exactly on a spectral null of a [0,1]-supported density and
#: choke the contiguous low-pass filter (see copula.fit_copula_density).
UNIT_SQUARE_PADDING = 0.375
LOG_FLOOR = 1e-12


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def as_points(x: ArrayLike, dims: int | None = None) -> np.ndarray:
    """Coerce query points to a float array of shape (m, d)."""
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None] if dims in (None, 1) else pts[None, :]
    if pts.ndim != 2:
        raise ValueError(f"points must be 1- or 2-dimensional, got shape {pts.shape}")
    if dims is not None and pts.shape[1] != dims:
        raise ValueError(f"expected points with {dims} coordinates, got {pts.shape[1]}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("query points must be finite")
    return pts


@dataclass(frozen=True)
class GridConfig:
    """Geometry of a regular estimation grid.

    ``lower``/``upper`` are the *padded* domain bounds; spatial nodes run
    inclusively from ``lower`` to ``upper`` with ``points_per_dim`` nodes
    per axis.

    Parameters
    ----------
    lower, upper : tuple of float
        Padded domain bounds per dimension, ``upper > lower``.
    points_per_dim : tuple of int
        Nodes per axis; each a power of two, at least 16.
    padding_factor : float
        Fraction of the data range that was added on each side when the
        grid was derived from data.  Recorded for provenance.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    points_per_dim: tuple[int, ...]
    padding_factor: float = DEFAULT_PADDING

    def __post_init__(self) -> None:
        if not (1 <= self.dims <= 2):
            raise ValueError(f"only 1- and 2-dimensional grids are supported, got dims={self.dims}")
        if len(self.upper) != self.dims or len(self.points_per_dim) != self.dims:
            raise ValueError("lower, upper and points_per_dim must have equal length")
        for lo, hi in zip(self.lower, self.upper):
            if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
                raise ValueError(f"invalid grid bounds ({lo}, {hi})")
        for n in self.points_per_dim:
            if n < 16 or not _is_power_of_two(n):
                raise ValueError(f"points_per_dim must be a power of two >= 16, got {n}")
        if self.padding_factor < 0:
            raise ValueError("padding_factor must be >= 0")

    @property
    def dims(self) -> int:
        return len(self.lower)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points_per_dim

    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(
            np.linspace(lo, hi, n)
            for lo, hi, n in zip(self.lower, self.upper, self.points_per_dim)
        )

    def spacing(self) -> tuple[float, ...]:
        return tuple(
            (hi - lo) / (n - 1)
            for lo, hi, n in zip(self.lower, self.upper, self.points_per_dim)
        )

    def contains(self, points: ArrayLike) -> np.ndarray:
        """Boolean mask of points lying inside the padded domain."""
        pts = as_points(points, self.dims)
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    @classmethod
    def from_data(
        cls,
        data: ArrayLike,
        points_per_dim: int | Sequence[int] | None = None,
        padding_factor: float = DEFAULT_PADDING,
    ) -> "GridConfig":
        """Padded grid covering a data set.

        Adds ``padding_factor`` times the data range on each side, which keeps
        the periodic wrap-around of the discrete transform away from the data.
        """
        pts = as_points(data)
        if pts.shape[0] < 1:
            raise ValueError("data must be nonempty")
        d = pts.shape[1]
        mins = pts.min(axis=0)
        maxs = pts.max(axis=0)
        ranges = maxs - mins
        if np.any(ranges <= 0):
            raise ValueError("all points identical along some dimension (zero data range)")
        if points_per_dim is None:
            points_per_dim = DEFAULT_POINTS_1D if d == 1 else DEFAULT_POINTS_2D
        if np.isscalar(points_per_dim):
            points_per_dim = (int(points_per_dim),) * d
        return cls(
            lower=tuple(mins - padding_factor * ranges),
            upper=tuple(maxs + padding_factor * ranges),
            points_per_dim=tuple(int(n) for n in points_per_dim),
            padding_factor=float(padding_factor),
        )

    @classmethod
    def unit_square(
        cls,
        points_per_dim: int = DEFAULT_POINTS_2D,
        padding_factor: float = UNIT_SQUARE_PADDING,
    ) -> "GridConfig":
        """Padded grid around [0, 1]^2 for copula-density fits."""
        d = float(padding_factor)
        return cls(
            lower=(-d, -d),
            upper=(1.0 + d, 1.0 + d),
            points_per_dim=(int(points_per_dim),) * 2,
            padding_factor=d,
        )


@dataclass(frozen=True)
class FrequencyGrid:
    """Discrete frequencies conjugate to a spatial grid.

    ``freqs`` holds, per dimension, the angular frequencies in shifted
    (ascending) order: zero sits at index ``n // 2`` and the set is closed
    under negation except for the single unpaired Nyquist node at index 0
    (even grid sizes), which the filter never admits.
    """

    spatial: GridConfig
    freqs: tuple[np.ndarray, ...] = field(init=False, repr=False)
    spacing: tuple[float, ...] = field(init=False)

    def __post_init__(self) -> None:
        fr = []
        sp = []
        for dx, n in zip(self.spatial.spacing(), self.spatial.points_per_dim):
            t = 2.0 * np.pi * np.fft.fftshift(np.fft.fftfreq(n, d=dx))
            fr.append(t)
            sp.append(float(t[1] - t[0]))
        object.__setattr__(self, "freqs", tuple(fr))
        object.__setattr__(self, "spacing", tuple(sp))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.spatial.points_per_dim

    @property
    def zero_index(self) -> tuple[int, ...]:
        return tuple(n // 2 for n in self.shape)


@dataclass
class DensityEstimate:
    """A fitted density on a regular grid.

    Attributes
    ----------
    grid : GridConfig
        Spatial geometry.
    values : ndarray
        Nonnegative density values at the spatial nodes, normalized so the
        trapezoidal quadrature over the evaluation domain equals one.
    phi_hat : ndarray
        Fourier transform of the estimate on the shifted frequency grid,
        recorded before the negative-lobe clipping; ``phi_hat`` at the zero
        frequency equals one.
    filter_mask : ndarray of bool
        Frequencies admitted by the low-pass stability filter.
    pre_clip_mass : float
        Trapezoidal mass of the raw inverse transform before clipping; values
        far from one indicate a problematic fit and are warned about.
    floor_epsilon : float
        Clamp applied by evaluation when a logarithm will be taken.
    eval_lower, eval_upper : tuple of float or None
        Evaluation domain when it is a strict sub-box of the grid (copula
        fits restrict to the unit square); None means the whole grid.
    n_samples : int
        Training sample size.
    """

    grid: GridConfig
    values: np.ndarray
    phi_hat: np.ndarray
    filter_mask: np.ndarray
    pre_clip_mass: float
    n_samples: int
    floor_epsilon: float = LOG_FLOOR
    eval_lower: tuple[float, ...] | None = None
    eval_upper: tuple[float, ...] | None = None

    MASS_TOL = 1e-9
    PHI0_TOL = 1e-12

    def __post_init__(self) -> None:
        if self.values.shape != self.grid.shape:
            raise ValueError("values do not match the grid shape")
        if np.any(self.values < 0):
            raise ValueError("density values must be nonnegative")
        mass = integrate_box(self, self.eval_lower, self.eval_upper)
        if abs(mass - 1.0) > self.MASS_TOL:
            raise ValueError(f"density mass {mass!r} deviates from 1 beyond {self.MASS_TOL}")
        phi0 = self.phi_hat[tuple(n // 2 for n in self.grid.shape)]
        if abs(phi0 - 1.0) > self.PHI0_TOL:
            raise ValueError(f"phi_hat(0) = {phi0!r} deviates from 1 beyond {self.PHI0_TOL}")
        if not 0.95 <= self.pre_clip_mass <= 1.05:
            warnings.warn(
                f"pre-clip mass {self.pre_clip_mass:.4f} outside [0.95, 1.05]; "
                "the Fourier inversion lost or created noticeable mass",
                RuntimeWarning,
                stacklevel=3,
            )

    @property
    def axes(self) -> tuple[np.ndarray, ...]:
        return self.grid.axes()

    def __call__(self, points: ArrayLike, clamp: bool = False) -> np.ndarray:
        return density_at(self, points, clamp=clamp)

    def log_density(self, points: ArrayLike) -> np.ndarray:
        """Floor-clamped log density, safe as a plug-in log."""
        return np.log(density_at(self, points, clamp=True))


def _axis_weights(lo_node: float, dx: float, n: int, a: float, b: float) -> np.ndarray:
    """Integration weights of the piecewise-linear interpolant over [a, b].

    For the full node range these reduce exactly to trapezoid weights.
    """
    w = np.zeros(n)
    a = max(a, lo_node)
    b = min(b, lo_node + (n - 1) * dx)
    if b <= a:
        return w
    ka = int(np.floor((a - lo_node) / dx))
    kb = min(int(np.floor((b - lo_node) / dx)), n - 2)
    for k in range(ka, kb + 1):
        c0 = lo_node + k * dx
        s = max(a, c0)
        e = min(b, c0 + dx)
        if e <= s:
            continue
        t0 = (s - c0) / dx
        t1 = (e - c0) / dx
        half_sq = (t1 * t1 - t0 * t0) / 2.0
        w[k] += dx * ((t1 - t0) - half_sq)
        w[k + 1] += dx * half_sq
    return w


def integrate_box(
    est: DensityEstimate,
    lower: Sequence[float] | None = None,
    upper: Sequence[float] | None = None,
) -> float:
    """Integral of the interpolated density over an axis-aligned box.

    Defaults to the whole grid, where the result is the plain trapezoidal
    quadrature of the node values.
    """
    lower = est.grid.lower if lower is None else tuple(lower)
    upper = est.grid.upper if upper is None else tuple(upper)
    ws = [
        _axis_weights(lo_node, dx, n, a, b)
        for lo_node, dx, n, a, b in zip(
            est.grid.lower, est.grid.spacing(), est.grid.points_per_dim, lower, upper
        )
    ]
    if est.grid.dims == 1:
        return float(ws[0] @ est.values)
    return float(ws[0] @ est.values @ ws[1])


def density_at(est: DensityEstimate, points: ArrayLike, clamp: bool = False) -> np.ndarray:
    """Multilinear interpolation of a fitted density at query points.

    Points outside the padded domain evaluate to ``floor_epsilon``.  With
    ``clamp=True`` every returned value is at least ``floor_epsilon``, the
    variant callers use before taking logs.  Estimates with a restricted
    evaluation domain (copula fits) refuse queries outside it.
    """
    pts = as_points(points, est.grid.dims)
    if est.eval_lower is not None:
        ok = np.all((pts >= np.asarray(est.eval_lower)) & (pts <= np.asarray(est.eval_upper)), axis=1)
        if not np.all(ok):
            raise ValueError(
                f"evaluation outside {est.eval_lower}..{est.eval_upper} is not defined for this estimate"
            )
    out = np.full(pts.shape[0], est.floor_epsilon)
    inside = est.grid.contains(pts)
    if np.any(inside):
        sub = pts[inside]
        idxs = []
        wgts = []
        for d, (lo, dx, n) in enumerate(
            zip(est.grid.lower, est.grid.spacing(), est.grid.points_per_dim)
        ):
            s = (sub[:, d] - lo) / dx
            k = np.clip(np.floor(s).astype(int), 0, n - 2)
            idxs.append(k)
            wgts.append(s - k)
        if est.grid.dims == 1:
            k, w = idxs[0], wgts[0]
            val = (1 - w) * est.values[k] + w * est.values[k + 1]
        else:
            ku, wu = idxs[0], wgts[0]
            kv, wv = idxs[1], wgts[1]
            val = (
                (1 - wu) * (1 - wv) * est.values[ku, kv]
                + wu * (1 - wv) * est.values[ku + 1, kv]
                + (1 - wu) * wv * est.values[ku, kv + 1]
                + wu * wv * est.values[ku + 1, kv + 1]
            )
        out[inside] = val
    if clamp:
        np.maximum(out, est.floor_epsilon, out=out)
    return out
