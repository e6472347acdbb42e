"""Discrete positive measures and the nonlinear potentials built on them.

A measure is a finite set of atoms plus an optional density (grid-sampled
or radial).  The central object is the truncated nonlinear potential

    W(x) = int_0^R [ mu(B_t(x)) / t^{n - alpha p} ]^{1/(p-1)} dt/t,

with alpha = 2k/(k+1) and p = k+1 in the k-Hessian setting; R = infinity
drops the truncation (then n > alpha p is required off the support).
Ball masses mu(B_t(x)) use closed balls; for pure-atom measures the
integrand is piecewise a power of t, and the quadrature integrates each
piece exactly, so atom potentials are exact up to roundoff.

The Riesz kernel used here is UNNORMALIZED, |x - y|^{alpha - n}.  Every
comparison in the toolkit is against constants "depending only on n, k",
so a fixed normalization factor is immaterial; do not mix these values
with conventions that include the gamma-function normalization.

Divergence is a meaningful answer for several quantities (self-energy of
an atom, ball-growth ratios of a point mass), so those return an inf
sentinel inside results rather than raising; genuinely invalid requests
(untruncated potential of a finite-mass measure at n <= alpha p) raise
``DivergentIntegralError``.
"""

from dataclasses import dataclass
from functools import cached_property
from itertools import product
from math import inf, isinf

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson
from scipy.special import betainc, beta as beta_fn

from .errors import DivergentIntegralError
from .exponents import ball_volume, sphere_area
from .grid import GridField, ball_weights, integrate
from .radial import RadialDensity, RadialField

WOLFF_POINTS_DEFAULT = 400  # log-grid points across the radius range


@dataclass(frozen=True)
class PotentialParams:
    """Exponents and truncation radius of a nonlinear potential."""

    alpha: float
    p: float
    rcap: float | None = None  # None means untruncated

    def __post_init__(self):
        if self.p <= 1:
            raise ValueError(f"need p > 1, got p={self.p}")
        if self.alpha <= 0:
            raise ValueError(f"need alpha > 0, got {self.alpha}")
        if self.rcap is not None and self.rcap <= 0:
            raise ValueError("truncation radius must be positive")

    @classmethod
    def for_order(cls, n: int, k: int, rcap: float | None = None):
        """The k-Hessian exponents alpha = 2k/(k+1), p = k+1."""
        params = cls(alpha=2.0 * k / (k + 1), p=float(k + 1), rcap=rcap)
        if params.alpha * params.p > n:
            raise ValueError(f"alpha*p = {2 * k} exceeds n = {n}")
        return params


@dataclass(frozen=True)
class DiscreteMeasure:
    """Atoms plus an optional density part (grid or radial)."""

    n: int
    atom_locations: np.ndarray
    atom_masses: np.ndarray
    grid_density: GridField | None = None
    radial_density: RadialDensity | None = None
    radial_center: tuple | None = None

    def __post_init__(self):
        loc = np.asarray(self.atom_locations, dtype=np.float64).reshape(-1, self.n)
        mas = np.asarray(self.atom_masses, dtype=np.float64).reshape(-1)
        if loc.shape[0] != mas.shape[0]:
            raise ValueError("atom locations and masses must pair up")
        if (mas <= 0).any():
            raise ValueError("atom masses must be positive")
        object.__setattr__(self, "atom_locations", loc)
        object.__setattr__(self, "atom_masses", mas)
        if self.grid_density is not None:
            if self.grid_density.n != self.n:
                raise ValueError("grid density dimension mismatch")
            if float(self.grid_density.values.min()) < 0:
                raise ValueError("density must be nonnegative")
        if self.radial_density is not None:
            if self.radial_density.n != self.n:
                raise ValueError("radial density dimension mismatch")
            center = self.radial_center or tuple(0.0 for _ in range(self.n))
            object.__setattr__(self, "radial_center", tuple(float(c) for c in center))

    @classmethod
    def point_masses(cls, n, locations, masses):
        return cls(n=n, atom_locations=locations, atom_masses=masses)

    @classmethod
    def from_grid_density(cls, field: GridField):
        return cls(n=field.n, atom_locations=np.empty((0, field.n)),
                   atom_masses=np.empty(0), grid_density=field)

    @classmethod
    def from_radial_density(cls, dens: RadialDensity, center=None):
        return cls(n=dens.n, atom_locations=np.empty((0, dens.n)),
                   atom_masses=np.empty(0), radial_density=dens,
                   radial_center=center)

    @cached_property
    def total_mass(self) -> float:
        total = float(self.atom_masses.sum())
        if self.grid_density is not None:
            total += integrate(self.grid_density)
        if self.radial_density is not None:
            total += self.radial_density.total_mass()
        return total

    @cached_property
    def _grid_node_table(self):
        """(positions, node masses, cell volumes) of the grid density part."""
        field = self.grid_density
        pos = field.points.reshape(-1, self.n)
        w = ball_weights(field).reshape(-1)
        masses = w * field.values.reshape(-1) * field.spacing ** self.n
        keep = masses > 0
        return pos[keep], masses[keep], w[keep] * field.spacing ** self.n

    @property
    def _grid_nodes(self):
        pos, masses, _ = self._grid_node_table
        return pos, masses

    @cached_property
    def _radial_mass_profile(self):
        """Cumulative mass of the radial density: sigma int_0^r f s^{n-1} ds.

        Integrated in the volume variable so the profile is monotone and
        exact for constant densities.
        """
        dens = self.radial_density
        return sphere_area(self.n) * cumulative_trapezoid(
            dens.values, x=dens.r ** self.n / self.n, initial=0.0)

    def support_bounds(self):
        """(min positive length scale, diameter bound) of the support."""
        lows, highs, scales = [], [], []
        if self.atom_locations.shape[0]:
            lows.append(self.atom_locations.min(axis=0))
            highs.append(self.atom_locations.max(axis=0))
            if self.atom_locations.shape[0] > 1:
                d = np.linalg.norm(
                    self.atom_locations[:, None] - self.atom_locations[None], axis=-1)
                pos = d[d > 0]
                if pos.size:
                    scales.append(float(pos.min()) / 4)
        if self.grid_density is not None:
            pos, _ = self._grid_nodes
            lows.append(pos.min(axis=0))
            highs.append(pos.max(axis=0))
            scales.append(self.grid_density.spacing)
        if self.radial_density is not None:
            c = np.asarray(self.radial_center)
            a = self.radial_density.support_radius
            lows.append(c - a)
            highs.append(c + a)
            scales.append(max(a, self.radial_density.r[-1]) / 256)
        if not lows:
            return 1.0, 1.0
        lo = np.min(np.vstack(lows), axis=0)
        hi = np.max(np.vstack(highs), axis=0)
        diam = max(float(np.linalg.norm(hi - lo)), 1e-9)
        return (min(scales) if scales else diam / 256), diam


def spherical_cap_fraction(n: int, cos_theta) -> np.ndarray:
    """Fraction of S^{n-1} within angle theta of a pole (cos form)."""
    z = np.clip((1.0 - np.asarray(cos_theta, dtype=np.float64)) / 2.0, 0.0, 1.0)
    return betainc((n - 1) / 2.0, (n - 1) / 2.0, z)


def sphere_band_fraction(n: int, rho, half_thickness: float) -> np.ndarray:
    """Fraction of the sphere of radius rho with |first coordinate| <= h."""
    rho = np.asarray(rho, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(rho > 0, np.minimum(half_thickness / np.maximum(rho, 1e-300), 1.0), 1.0)
    hi = spherical_cap_fraction(n, -c)
    lo = spherical_cap_fraction(n, c)
    return hi - lo


def _radial_density_ball_mass(mu: DiscreteMeasure, x, ts) -> np.ndarray:
    """mu(B_t(x)) of the radial density part, for each t (cap quadrature)."""
    dens = mu.radial_density
    n = mu.n
    d = float(np.linalg.norm(np.asarray(x, dtype=np.float64) - np.asarray(mu.radial_center)))
    ts = np.asarray(ts, dtype=np.float64)
    cum = mu._radial_mass_profile
    if d < 1e-12 * max(1.0, dens.r[-1]):
        return np.interp(ts, dens.r, cum, right=cum[-1])
    rho = dens.r
    with np.errstate(divide="ignore", invalid="ignore"):
        cos0 = (rho[None, :] ** 2 + d ** 2 - ts[:, None] ** 2) / (2.0 * rho[None, :] * d)
    cos0 = np.where(rho[None, :] > 0, cos0, np.where(ts[:, None] >= d, -1.0, 1.0))
    frac = spherical_cap_fraction(n, np.clip(cos0, -1.0, 1.0))
    integrand = dens.values[None, :] * rho[None, :] ** (n - 1) * frac
    return sphere_area(n) * simpson(integrand, x=rho, axis=1)


def _grid_density_ball_mass(mu: DiscreteMeasure, x, ts, refine=True) -> np.ndarray:
    """mu(B_t(x)) of the grid density part, for each t.

    Node cell masses are counted by center distance, with 3^n-subsample
    fraction weights for cells straddling the query sphere when
    ``refine`` is set.
    """
    pos, masses = mu._grid_nodes
    x = np.asarray(x, dtype=np.float64)
    dist = np.linalg.norm(pos - x, axis=1)
    order = np.argsort(dist)
    dist_sorted = dist[order]
    prefix = np.concatenate([[0.0], np.cumsum(masses[order])])
    ts = np.asarray(ts, dtype=np.float64)
    base = prefix[np.searchsorted(dist_sorted, ts, side="right")]
    if not refine:
        return base
    h = mu.grid_density.spacing
    hd = 0.5 * h * np.sqrt(mu.n)
    offsets = np.array(list(product((-h / 3, 0.0, h / 3), repeat=mu.n)))
    out = base.copy()
    for i, t in enumerate(ts):
        lo = np.searchsorted(dist_sorted, t - hd, side="right")
        hi = np.searchsorted(dist_sorted, t + hd, side="right")
        if hi == lo:
            continue
        band = order[lo:hi]
        sub = pos[band][:, None, :] + offsets[None, :, :]
        frac = (np.linalg.norm(sub - x, axis=-1) <= t).mean(axis=1)
        inside_base = dist[band] <= t
        out[i] += float(np.sum(masses[band] * (frac - inside_base)))
    return out


def ball_mass_profile(mu: DiscreteMeasure, x, ts, refine=True) -> np.ndarray:
    """mu of the closed ball of radius t about x, for each t."""
    x = np.asarray(x, dtype=np.float64)
    ts = np.asarray(ts, dtype=np.float64)
    out = np.zeros(ts.shape)
    if mu.atom_locations.shape[0]:
        d = np.sort(np.linalg.norm(mu.atom_locations - x, axis=1))
        order = np.argsort(np.linalg.norm(mu.atom_locations - x, axis=1))
        prefix = np.concatenate([[0.0], np.cumsum(mu.atom_masses[order])])
        out += prefix[np.searchsorted(d, ts, side="right")]
    if mu.grid_density is not None:
        out += _grid_density_ball_mass(mu, x, ts, refine=refine)
    if mu.radial_density is not None:
        out += _radial_density_ball_mass(mu, x, ts)
    return out


def ball_mass(mu: DiscreteMeasure, x, t: float) -> float:
    """mu(closed B_t(x))."""
    if t < 0:
        raise ValueError("radius must be nonnegative")
    return float(ball_mass_profile(mu, x, np.array([t]))[0])


def _support_window(mu: DiscreteMeasure, x):
    """(first radius with mass, radius capturing all mass, covers_x flag)."""
    x = np.asarray(x, dtype=np.float64)
    t_lo, t_hi = inf, 0.0
    covers = False
    if mu.atom_locations.shape[0]:
        d = np.linalg.norm(mu.atom_locations - x, axis=1)
        pos = d[d > 0]
        if pos.size:
            t_lo = min(t_lo, float(pos.min()))
        t_hi = max(t_hi, float(d.max()))
    if mu.grid_density is not None:
        pos, _ = mu._grid_nodes
        d = np.linalg.norm(pos - x, axis=1)
        h = mu.grid_density.spacing
        t_lo = min(t_lo, max(float(d.min()) - h, 0.0))
        t_hi = max(t_hi, float(d.max()) + h)
        covers = covers or float(d.min()) < h
    if mu.radial_density is not None:
        d = float(np.linalg.norm(x - np.asarray(mu.radial_center)))
        a = mu.radial_density.support_radius
        t_lo = min(t_lo, max(d - a, 0.0))
        t_hi = max(t_hi, d + a)
        covers = covers or d < a
    if covers:
        t_lo = 0.0
    return t_lo, t_hi, covers


def _atom_at(mu: DiscreteMeasure, x) -> float:
    if not mu.atom_locations.shape[0]:
        return 0.0
    d = np.linalg.norm(mu.atom_locations - np.asarray(x, dtype=np.float64), axis=1)
    scale = max(1.0, float(np.abs(mu.atom_locations).max(initial=0.0)))
    return float(mu.atom_masses[d <= 1e-12 * scale].sum())


def wolff(mu: DiscreteMeasure, x, params: PotentialParams,
          points: int = WOLFF_POINTS_DEFAULT) -> float:
    """The (truncated) nonlinear potential of mu at x.

    Log-spaced quadrature with atom distances inserted as breakpoints and
    the power law integrated exactly on every subinterval, so pure-atom
    measures are computed exactly.  Returns inf when the integral
    diverges at 0 (an atom sits at x); raises when the untruncated
    integral diverges at infinity (n <= alpha p with positive mass).
    """
    n = mu.n
    s = n - params.alpha * params.p
    pm1 = params.p - 1.0
    beta = -s / pm1
    if mu.total_mass == 0.0:
        return 0.0
    if params.rcap is None and s <= 0:
        raise DivergentIntegralError(
            f"untruncated potential diverges: n = {n} <= alpha*p = {params.alpha * params.p}")
    if _atom_at(mu, x) > 0 and beta < 0:
        return inf
    t_lo, t_hi, covers = _support_window(mu, x)
    upper = t_hi if params.rcap is None else min(params.rcap, t_hi)
    head = 0.0
    if covers or t_lo <= 0.0:
        t_eps = max(t_hi, 1.0) * 1e-7
        # local piece, assuming mu(B_t) ~ c t^n near 0
        c = ball_mass(mu, x, t_eps) / t_eps ** n
        expo = (n - s) / pm1
        head = c ** (1.0 / pm1) * (t_eps ** expo) / expo
        t_lo = t_eps
    if not np.isfinite(t_lo) or t_lo >= upper:
        # no mass before the truncation radius, or point-supported tail only
        if params.rcap is not None and t_lo >= params.rcap:
            return head
        if not np.isfinite(t_lo):
            return head
        upper = t_lo  # all mass beyond upper: only the tail below contributes
    grid = np.geomspace(t_lo, upper, points) if upper > t_lo else np.array([t_lo])
    breaks = []
    if mu.atom_locations.shape[0]:
        d = np.linalg.norm(mu.atom_locations - np.asarray(x, dtype=np.float64), axis=1)
        breaks = [v for v in np.unique(d) if t_lo < v < upper]
    grid = np.unique(np.concatenate([grid, np.asarray(breaks),
                                     np.array([t_lo, upper])]))
    total = head
    if grid.size > 1:
        a, b = grid[:-1], grid[1:]
        mids = np.sqrt(a * b)
        mvals = ball_mass_profile(mu, x, mids) ** (1.0 / pm1)
        if abs(beta) > 1e-14:
            total += float(np.sum(mvals * (b ** beta - a ** beta) / beta))
        else:
            total += float(np.sum(mvals * np.log(b / a)))
    if params.rcap is None:
        total += mu.total_mass ** (1.0 / pm1) * (-(upper ** beta)) / beta
    elif params.rcap > upper:
        total += mu.total_mass ** (1.0 / pm1) * (params.rcap ** beta - upper ** beta) / beta
    return total


def wolff_radial_profile(mu: DiscreteMeasure, radii, params: PotentialParams,
                         points: int = WOLFF_POINTS_DEFAULT) -> np.ndarray:
    """Potential values at x = r e_1 for each r (radially symmetric mu)."""
    e1 = np.zeros(mu.n)
    out = np.empty(len(radii))
    for i, r in enumerate(radii):
        x = e1.copy()
        x[0] = r
        out[i] = wolff(mu, x, params, points=points)
    return out


def _gauss_sphere_nodes(n: int, points: int = 192):
    """Quadrature nodes/weights for angular means over S^{n-1}.

    Returns (cos values, weights summing to 1) for the distribution of
    the cosine of the polar angle under the uniform sphere measure.
    """
    nodes, wts = np.polynomial.legendre.leggauss(points)
    density = (1.0 - nodes ** 2) ** ((n - 3) / 2.0) / beta_fn(0.5, (n - 1) / 2.0)
    w = wts * density
    return nodes, w / w.sum()


def _riesz_radial_density(dens: RadialDensity, center, x, alpha: float) -> float:
    """Riesz potential of a radial density at an arbitrary point."""
    n = dens.n
    d = float(np.linalg.norm(np.asarray(x, dtype=np.float64) - np.asarray(center)))
    rho = dens.r
    if d < 1e-12 * max(1.0, rho[-1]):
        integrand = dens.values * rho ** (alpha - 1)
        return sphere_area(n) * float(simpson(integrand, x=rho))
    cos, w = _gauss_sphere_nodes(n)
    r2 = d ** 2 + rho[:, None] ** 2 - 2.0 * d * rho[:, None] * cos[None, :]
    floor = (max(np.diff(rho).min(), 1e-12) * 0.5) ** 2
    kernel = np.maximum(r2, floor) ** ((alpha - n) / 2.0)
    mean_kernel = kernel @ w
    integrand = dens.values * rho ** (n - 1) * mean_kernel
    return sphere_area(n) * float(simpson(integrand, x=rho))


def riesz(mu: DiscreteMeasure, x, alpha: float) -> float:
    """int |x - y|^{alpha - n} d mu(y), unnormalized kernel.

    Returns inf when x coincides with an atom.
    """
    n = mu.n
    if not 0 < alpha < n:
        raise ValueError(f"need 0 < alpha < n = {n}, got {alpha}")
    x = np.asarray(x, dtype=np.float64)
    total = 0.0
    if mu.atom_locations.shape[0]:
        d = np.linalg.norm(mu.atom_locations - x, axis=1)
        scale = max(1.0, float(np.abs(mu.atom_locations).max(initial=0.0)))
        if (d <= 1e-12 * scale).any():
            return inf
        total += float(np.sum(mu.atom_masses * d ** (alpha - n)))
    if mu.grid_density is not None:
        pos, masses, vols = mu._grid_node_table
        d = np.linalg.norm(pos - x, axis=1)
        # cells containing (or nearly containing) x use the exact mean of
        # the kernel over an equal-volume ball instead of the node value
        rho_eq = (vols / ball_volume(n)) ** (1.0 / n)
        kernel = np.where(d >= rho_eq, np.maximum(d, 1e-300) ** (alpha - n),
                          (n / alpha) * rho_eq ** (alpha - n))
        total += float(np.sum(masses * kernel))
    if mu.radial_density is not None:
        total += _riesz_radial_density(mu.radial_density, mu.radial_center, x, alpha)
    return total


def havin_mazya(mu: DiscreteMeasure, x, params: PotentialParams,
                inner_samples: int = 400) -> float:
    """Composition potential I_alpha[(I_alpha mu)^{1/(p-1)}](x).

    The inner potential is sampled on a log-radial grid about the
    measure's center of symmetry (radially symmetric measures), or on a
    Cartesian grid padded around the support (atom measures in n <= 4).
    Power-law ends are integrated in closed form on the radial path.
    """
    n = mu.n
    alpha, p = params.alpha, params.p
    if alpha * p >= n:
        raise ValueError("composition potential needs n > alpha*p")
    x = np.asarray(x, dtype=np.float64)
    center = _symmetry_center(mu)
    if center is not None:
        d = max(float(np.linalg.norm(x - center)), 1e-12)
        _, t_hi, _ = _support_window(mu, center)
        scale = max(t_hi, 1e-6)
        rho = np.geomspace(1e-3 * scale, 1e3 * max(scale, d), inner_samples)
        g = np.array([riesz(mu, center + _unit(n) * r, alpha) for r in rho])
        g = np.clip(g, 0.0, None) ** (1.0 / (p - 1.0))
        gd = RadialDensity(n=n, r=np.concatenate([[0.0], rho]),
                           values=np.concatenate([[g[0]], g]))
        core = _riesz_radial_density(gd, center, x, alpha)
        # closed-form power ends
        head_pow = _log_slope(rho[:2], g[:2])
        head_expo = n + head_pow
        head = 0.0
        if head_expo > 0:
            head = sphere_area(n) * d ** (alpha - n) * g[0] * rho[0] ** n / head_expo
        tail_pow = _log_slope(rho[-2:], g[-2:])
        tail_expo = alpha + tail_pow
        tail = 0.0
        if tail_expo < 0:
            tail = sphere_area(n) * g[-1] * rho[-1] ** alpha / (-tail_expo)
        return core + head + tail
    if mu.grid_density is None and n <= 4 and mu.atom_locations.shape[0]:
        from .grid import grid_from_function
        lo = mu.atom_locations.min(axis=0)
        hi = mu.atom_locations.max(axis=0)
        c = 0.5 * (lo + hi)
        radius = max(float(np.linalg.norm(hi - lo)) / 2 + 1e-6,
                     float(np.linalg.norm(x - c))) * 4.0

        def inner(pts):
            d = np.linalg.norm(pts[..., None, :] - mu.atom_locations, axis=-1)
            d = np.maximum(d, 1e-9 * radius)
            return np.sum(mu.atom_masses * d ** (alpha - n), axis=-1) ** (1.0 / (p - 1.0))

        g = grid_from_function(inner, n, radius, resolution=33, center=tuple(c))
        return riesz(DiscreteMeasure.from_grid_density(g), x, alpha)
    raise ValueError("unsupported measure shape for the composition potential")


def _unit(n):
    e = np.zeros(n)
    e[0] = 1.0
    return e


def _symmetry_center(mu: DiscreteMeasure):
    if mu.grid_density is not None:
        return None
    if mu.radial_density is not None and mu.atom_locations.shape[0] == 0:
        return np.asarray(mu.radial_center, dtype=np.float64)
    if mu.radial_density is None and mu.atom_locations.shape[0] == 1:
        return mu.atom_locations[0]
    return None


def _log_slope(xs, ys):
    if ys[0] <= 0 or ys[1] <= 0:
        return 0.0
    return float(np.log(ys[1] / ys[0]) / np.log(xs[1] / xs[0]))


def wolff_energy(mu: DiscreteMeasure, params: PotentialParams) -> float:
    """int W dmu; inf (not an exception) when an atom's self-energy diverges."""
    total = 0.0
    for loc, m in zip(mu.atom_locations, mu.atom_masses):
        w = wolff(mu, loc, params)
        if isinf(w):
            return inf
        total += m * w
    if mu.radial_density is not None:
        dens = mu.radial_density
        radii = np.linspace(0.0, dens.r[-1], 160)
        wv = np.empty(radii.size)
        for i, r in enumerate(radii):
            wv[i] = wolff(mu, np.asarray(mu.radial_center) + _unit(mu.n) * r, params)
        winterp = np.interp(dens.r, radii, wv)
        total += sphere_area(mu.n) * float(
            simpson(dens.values * winterp * dens.r ** (mu.n - 1), x=dens.r))
    if mu.grid_density is not None:
        pos, masses = mu._grid_nodes
        for p_, m in zip(pos, masses):
            total += m * wolff(mu, p_, params, points=120)
    return total


@dataclass(frozen=True)
class SlabDensity:
    """Unit density on the slab |x_1 - offset| <= thickness/2 in R^n.

    Ball masses are exact (incomplete-beta section volumes); ``extent``
    only bounds the diameter used when enumerating candidate balls.
    """

    n: int
    thickness: float
    extent: float
    offset: float = 0.0

    def ball_mass(self, x, t: float) -> float:
        return float(self.ball_mass_profile(x, np.array([t]))[0])

    def ball_mass_profile(self, x, ts) -> np.ndarray:
        n = self.n
        d1 = abs(float(np.asarray(x, dtype=np.float64)[0]) - self.offset)
        ts = np.asarray(ts, dtype=np.float64)
        out = np.zeros(ts.shape)
        pos = ts > 0
        t = ts[pos]
        wlo = np.clip((-self.thickness / 2 - d1) / t, -1.0, 1.0)
        whi = np.clip((self.thickness / 2 - d1) / t, -1.0, 1.0)
        m = (n + 1) / 2.0
        norm = 2.0 * 4.0 ** ((n - 1) / 2.0) * beta_fn(m, m)
        cdf_hi = betainc(m, m, (1.0 + whi) / 2.0)
        cdf_lo = betainc(m, m, (1.0 + wlo) / 2.0)
        out[pos] = ball_volume(n - 1) * t ** n * norm * (cdf_hi - cdf_lo)
        return out

    def support_bounds(self):
        return self.thickness / 2.0, 2.0 * self.extent

    def lq_norm_radial(self, u: RadialField, q: float) -> float:
        """L^q norm of a radial profile (centered at the origin) in this slab."""
        if self.offset != 0.0:
            raise ValueError("radial norms assume a slab through the origin")
        band = sphere_band_fraction(self.n, u.r, self.thickness / 2.0)
        val = sphere_area(self.n) * float(
            simpson(np.abs(u.u) ** q * band * u.r ** (self.n - 1), x=u.r))
        return val ** (1.0 / q)


def lq_norm_radial(omega, u: RadialField, q: float) -> float:
    """L^q norm of a radial profile against a measure centered about 0."""
    if isinstance(omega, SlabDensity):
        return omega.lq_norm_radial(u, q)
    total = 0.0
    if omega.atom_locations.shape[0]:
        d = np.linalg.norm(omega.atom_locations, axis=1)
        vals = np.interp(d, u.r, np.abs(u.u))
        total += float(np.sum(omega.atom_masses * vals ** q))
    if omega.grid_density is not None:
        pos, masses = omega._grid_nodes
        d = np.linalg.norm(pos, axis=1)
        vals = np.interp(d, u.r, np.abs(u.u))
        total += float(np.sum(masses * vals ** q))
    if omega.radial_density is not None:
        dens = omega.radial_density
        vals = np.interp(dens.r, u.r, np.abs(u.u))
        total += sphere_area(omega.n) * float(
            simpson(dens.values * vals ** q * dens.r ** (omega.n - 1), x=dens.r))
    return total ** (1.0 / q)


def _measure_ball_profile(omega, x, ts) -> np.ndarray:
    if isinstance(omega, SlabDensity):
        return omega.ball_mass_profile(x, ts)
    return ball_mass_profile(omega, x, ts)


def _kappa_centers(omega) -> np.ndarray:
    n = omega.n
    if isinstance(omega, SlabDensity):
        pts = [np.zeros(n)]
        for j in range(1, min(n, 3)):
            for s in (0.25 * omega.extent, 0.5 * omega.extent):
                e = np.zeros(n)
                e[j] = s
                pts.append(e)
        return np.array(pts)
    pts = []
    if omega.atom_locations.shape[0]:
        pts.extend(omega.atom_locations[:64])
    if omega.grid_density is not None:
        pos, _ = omega._grid_nodes
        stride = max(1, pos.shape[0] // 128)
        pts.extend(pos[::stride])
        lo, hi = pos.min(axis=0), pos.max(axis=0)
        for frac in product((0.25, 0.5, 0.75), repeat=n):
            pts.append(lo + np.asarray(frac) * (hi - lo))
    if omega.radial_density is not None:
        c = np.asarray(omega.radial_center)
        a = max(omega.radial_density.support_radius, 1e-9)
        pts.append(c)
        for f in (0.3, 0.7, 1.0):
            pts.append(c + _unit(n) * f * a)
    return np.array(pts) if pts else np.zeros((1, n))


@dataclass(frozen=True)
class BallFamilyResult:
    """Supremum of a ball-growth ratio over a dyadic family."""

    value: float
    divergent: bool
    witness_center: tuple
    witness_radius: float
    max_by_radius: np.ndarray
    radii: np.ndarray


def _lattice_ball_volume(field: GridField, center, r: float) -> float:
    """Ball volume measured on the field's lattice (cell fractions).

    Used as the denominator for small balls so that interior ratios of a
    lattice-sampled Lebesgue measure are exactly 1.
    """
    h = field.spacing
    n = field.n
    ax0 = [field.center[i] - h * ((field.shape[i] - 1) / 2) for i in range(n)]
    c = np.asarray(center, dtype=np.float64)
    axes = []
    for i in range(n):
        j_lo = int(np.floor((c[i] - r - ax0[i]) / h)) - 1
        j_hi = int(np.ceil((c[i] + r - ax0[i]) / h)) + 1
        axes.append(ax0[i] + h * np.arange(j_lo, j_hi + 1))
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    dist = np.linalg.norm(pts - c, axis=1)
    hd = 0.5 * h * np.sqrt(n)
    vol = float(np.sum(dist <= r - hd)) * h ** n
    strad = (dist > r - hd) & (dist < r + hd)
    if strad.any():
        offsets = np.array(list(product((-h / 3, 0.0, h / 3), repeat=n)))
        sub = pts[strad][:, None, :] + offsets[None, :, :]
        frac = (np.linalg.norm(sub - c, axis=-1) <= r).mean(axis=1)
        vol += float(frac.sum()) * h ** n
    return vol


def adams_kappa(omega, q: float, k: int, centers=None, radii=None) -> BallFamilyResult:
    """sup over balls of omega(B) / |B|^{(1 - 2k/n) q/(k+1)}.

    The supremum is approximated over a dyadic family (atom/density
    centers plus a coarse lattice; dyadic radii from the measure's
    smallest scale to four diameters).  Divergence along shrinking balls
    is detected from growth across the three smallest radii and reported
    with an inf value.
    """
    n = omega.n
    if q <= 0:
        raise ValueError("need q > 0")
    if 2 * k >= n:
        raise ValueError("ball-growth exponent needs 2k < n")
    theta = (1 - 2 * k / n) * q / (k + 1)
    r_min, diam = omega.support_bounds()
    if radii is None:
        count = int(np.ceil(np.log2(4 * diam / r_min))) + 1
        radii = r_min * 2.0 ** np.arange(count)
    radii = np.asarray(sorted(radii), dtype=np.float64)
    if centers is None:
        centers = _kappa_centers(omega)
    grid_field = getattr(omega, "grid_density", None)
    best = -inf
    witness = (tuple(np.zeros(n)), radii[0])
    max_by_radius = np.zeros(radii.size)
    for c in centers:
        masses = _measure_ball_profile(omega, c, radii)
        if grid_field is not None:
            # small balls compare against the ball volume measured on the
            # same lattice, cancelling the shared discretization bias
            cut = (16.001 if n <= 3 else 8.001) * grid_field.spacing
            denom = np.array([
                _lattice_ball_volume(grid_field, c, r) if r <= cut
                else ball_volume(n) * r ** n for r in radii])
        else:
            denom = ball_volume(n) * radii ** n
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(denom > 0, masses / denom ** theta, 0.0)
        max_by_radius = np.maximum(max_by_radius, ratios)
        i = int(np.argmax(ratios))
        if ratios[i] > best:
            best = float(ratios[i])
            witness = (tuple(float(v) for v in c), float(radii[i]))
    divergent = bool(
        radii.size >= 3
        and max_by_radius[0] > max_by_radius[1] > max_by_radius[2]
        and max_by_radius[0] >= 4.0 * max_by_radius[2])
    return BallFamilyResult(value=inf if divergent else best, divergent=divergent,
                            witness_center=witness[0], witness_radius=witness[1],
                            max_by_radius=max_by_radius, radii=radii)


def fefferman_phong_check(w, eps: float, k: int, centers=None,
                          radii=None) -> BallFamilyResult:
    """sup over balls of int_B w^{1+eps} / R^{n - 2k(1+eps)} (dyadic family).

    ``w`` is a nonnegative density given as a GridField or RadialDensity.
    Divergence under truncation refinement is a caller-side check: run at
    two resolutions and compare the suprema.
    """
    if eps <= 0:
        raise ValueError("need eps > 0")
    if isinstance(w, GridField):
        nu = DiscreteMeasure.from_grid_density(
            w.with_values(w.values ** (1.0 + eps)))
    elif isinstance(w, RadialDensity):
        nu = DiscreteMeasure.from_radial_density(
            RadialDensity(n=w.n, r=w.r, values=w.values ** (1.0 + eps)))
    else:
        raise TypeError("weight must be a GridField or RadialDensity")
    n = nu.n
    expo = n - 2 * k * (1.0 + eps)
    r_min, diam = nu.support_bounds()
    if radii is None:
        count = int(np.ceil(np.log2(4 * diam / r_min))) + 1
        radii = r_min * 2.0 ** np.arange(count)
    radii = np.asarray(sorted(radii), dtype=np.float64)
    if centers is None:
        centers = _kappa_centers(nu)
    best = -inf
    witness = (tuple(np.zeros(n)), radii[0])
    max_by_radius = np.zeros(radii.size)
    for c in centers:
        masses = ball_mass_profile(nu, c, radii)
        ratios = masses / radii ** expo
        max_by_radius = np.maximum(max_by_radius, ratios)
        i = int(np.argmax(ratios))
        if ratios[i] > best:
            best = float(ratios[i])
            witness = (tuple(float(v) for v in c), float(radii[i]))
    return BallFamilyResult(value=best, divergent=False,
                            witness_center=witness[0], witness_radius=witness[1],
                            max_by_radius=max_by_radius, radii=radii)
