"""Radial k-convex profiles and the radial form of the k-Hessian operator.

For a radial function u(|x|) on R^n the Hessian eigenvalues at radius r
are u''(r) (once, radial direction) and u'(r)/r (n-1 times, tangential),
so

    F_k[u](r) = C(n-1, k) (u'/r)^k + C(n-1, k-1) (u'/r)^{k-1} u''
              = (C(n-1, k-1)/k) r^{1-n} d/dr [ r^{n-k} (u')^k ].

The divergence form inverts by quadrature: given a density f >= 0,

    u'(r) = [ (k / C(n-1, k-1)) r^{k-n} int_0^r s^{n-1} f(s) ds ]^{1/k},

and u follows by integrating u' inward from the boundary (ball domains)
or from infinity (entire-space profiles, which require n > 2k and carry
an exact power-law tail beyond the density support).

At r = 0 the ratio u'/r is evaluated by parabolic extrapolation through
the first three positive samples, which removes the 0/0 without ghost
points.
"""

from dataclasses import dataclass, replace
from math import comb, inf, isinf

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid, simpson

from .errors import DivergentIntegralError, NotAdmissibleError
from .exponents import sphere_area

ENTIRE_TRUNCATION_FACTOR = 1000.0  # truncation radius / density support radius
DEFAULT_SAMPLES = 10_000


@dataclass(frozen=True)
class RadialField:
    """A radial profile u(r) with its derivative on an increasing r-grid.

    ``entire`` profiles represent functions on all of R^n truncated at
    ``radius``; beyond ``support_radius`` the derivative is exactly
    ``tail_coef * r**tail_power`` and integrals use that closed form.
    """

    n: int
    radius: float
    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    entire: bool = False
    support_radius: float | None = None
    tail_coef: float | None = None
    tail_power: float | None = None
    description: str = ""

    def __post_init__(self):
        r = np.asarray(self.r, dtype=np.float64)
        if r[0] != 0.0 or np.any(np.diff(r) <= 0):
            raise ValueError("r-grid must start at 0 and increase strictly")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "u", np.asarray(self.u, dtype=np.float64))
        object.__setattr__(self, "du", np.asarray(self.du, dtype=np.float64))
        if not (self.r.shape == self.u.shape == self.du.shape):
            raise ValueError("r, u, du must have identical shapes")

    @property
    def samples(self) -> int:
        return self.r.size


@dataclass(frozen=True)
class RadialDensity:
    """A nonnegative radial density f(r) sampled on an increasing grid."""

    n: int
    r: np.ndarray
    values: np.ndarray
    description: str = ""

    def __post_init__(self):
        r = np.asarray(self.r, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if np.any(np.diff(r) <= 0):
            raise ValueError("r-grid must increase strictly")
        if v.min(initial=0.0) < -1e-12 * max(1.0, abs(v).max(initial=0.0)):
            raise ValueError("density must be nonnegative")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "values", np.clip(v, 0.0, None))

    @classmethod
    def from_callable(cls, fn, n, r_max, samples=2001, description=""):
        r = np.linspace(0.0, r_max, samples)
        return cls(n=n, r=r, values=np.asarray(fn(r), dtype=np.float64),
                   description=description)

    @property
    def support_radius(self) -> float:
        nz = np.nonzero(self.values > 1e-300)[0]
        return float(self.r[nz[-1]]) if nz.size else 0.0

    def total_mass(self) -> float:
        return sphere_area(self.n) * float(
            simpson(self.values * self.r ** (self.n - 1), x=self.r))


def _ratio_profile(field: RadialField) -> np.ndarray:
    """u'(r)/r with the r=0 limit filled in by parabolic extrapolation."""
    r, du = field.r, field.du
    g = np.empty_like(du)
    g[1:] = du[1:] / r[1:]
    r1, r2, r3 = r[1], r[2], r[3]
    g1, g2, g3 = g[1], g[2], g[3]
    # Lagrange quadratic through the first three positive samples, at 0
    g[0] = (g1 * r2 * r3 / ((r1 - r2) * (r1 - r3))
            + g2 * r1 * r3 / ((r2 - r1) * (r2 - r3))
            + g3 * r1 * r2 / ((r3 - r1) * (r3 - r2)))
    return g


def _second_derivative(field: RadialField) -> np.ndarray:
    return np.gradient(field.du, field.r, edge_order=2)


def radial_sigma_profiles(u: RadialField, kmax: int) -> np.ndarray:
    """S_0..S_kmax of the radial Hessian eigenvalues at every sample."""
    n = u.n
    g = _ratio_profile(u)
    upp = _second_derivative(u)
    out = np.empty((kmax + 1, u.samples))
    out[0] = 1.0
    for j in range(1, kmax + 1):
        tangential = comb(n - 1, j) * g ** j
        mixed = comb(n - 1, j - 1) * g ** (j - 1) * upp
        out[j] = tangential + mixed
    return out


def radial_fk(u: RadialField, k: int) -> np.ndarray:
    """Profile of F_k[u] from the eigenvalue form."""
    if not 1 <= k <= u.n:
        raise ValueError(f"need 1 <= k <= n={u.n}, got k={k}")
    return radial_sigma_profiles(u, k)[k]


def radial_fk_divergence_form(u: RadialField, k: int) -> np.ndarray:
    """Profile of F_k[u] from (C(n-1,k-1)/k) r^{1-n} d/dr[r^{n-k} (u')^k].

    Must agree with ``radial_fk``; kept as the independent cross-check.
    The flux derivative is taken in the volume variable z = r^n/n, which
    absorbs the r^{1-n} factor and stays conditioned at r = 0.
    """
    n, r, du = u.n, u.r, u.du
    flux = r ** (n - k) * du ** k
    z = r ** n / n
    return (comb(n - 1, k - 1) / k) * np.gradient(flux, z, edge_order=2)


def radial_is_k_convex(u: RadialField, k: int, tol: float | None = None) -> bool:
    s = radial_sigma_profiles(u, k)
    if tol is None:
        tol = 1e-8 * max(1.0, float(np.abs(s[1]).max()))
    return bool((s[1:] >= -tol).all())


def _require_admissible(u: RadialField, k: int, tol: float | None = None):
    s = radial_sigma_profiles(u, k)
    if tol is None:
        tol = 1e-8 * max(1.0, float(np.abs(s[1]).max()))
    worst_j, worst_i = np.unravel_index(np.argmin(s[1:]), s[1:].shape)
    if s[1:][worst_j, worst_i] < -tol:
        raise NotAdmissibleError(
            f"profile is not {k}-convex: S_{worst_j + 1} = "
            f"{s[1:][worst_j, worst_i]:.3e} at r = {u.r[worst_i]:.6g}",
            worst_index=int(worst_i), worst_value=float(s[1:][worst_j, worst_i]))
    utol = 1e-8 * max(1.0, float(np.abs(u.u).max()))
    i = int(np.argmax(u.u))
    if u.u[i] > utol:
        raise NotAdmissibleError(
            f"profile must be nonpositive: u = {u.u[i]:.3e} at r = {u.r[i]:.6g}",
            worst_index=i, worst_value=float(u.u[i]))


def solve_radial(f: RadialDensity, k: int, domain: str = "ball",
                 radius: float | None = None,
                 samples: int = DEFAULT_SAMPLES,
                 description: str = "") -> RadialField:
    """Invert F_k[u] = f for a radial k-convex u, by quadrature.

    ``domain`` is "ball" (zero boundary value at ``radius``, default the
    density's outer grid radius) or "entire" (requires n > 2k and a
    compactly supported density; the profile is truncated at
    ``ENTIRE_TRUNCATION_FACTOR`` times the support radius and carries an
    exact power tail beyond the support).
    """
    n = f.n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n={n}, got k={k}")
    if domain == "ball":
        big_r = float(radius if radius is not None else f.r[-1])
        r = np.linspace(0.0, big_r, samples)
    elif domain == "entire":
        if n <= 2 * k:
            raise DivergentIntegralError(
                f"entire-space profiles need n > 2k (got n={n}, k={k}): "
                "the derivative tail is not integrable")
        a = f.support_radius
        if a <= 0:
            r = np.linspace(0.0, 1.0, samples)
        else:
            big_t = ENTIRE_TRUNCATION_FACTOR * a
            n_lin = samples // 2
            lin = np.linspace(0.0, 2 * a, n_lin)
            geo = np.geomspace(2 * a, big_t, samples - n_lin + 1)[1:]
            r = np.concatenate([lin, geo])
        big_r = float(r[-1])
    else:
        raise ValueError(f"unknown domain {domain!r}")

    fv = np.interp(r, f.r, f.values, left=f.values[0], right=0.0)
    coef = k / comb(n - 1, k - 1)
    # integrate the moment in the volume variable z = s^n / n: exact for
    # constant densities and never negative, unlike Simpson near 0
    moment = cumulative_trapezoid(fv, x=r ** n / n, initial=0.0)
    du = np.zeros_like(r)
    du[1:] = (coef * moment[1:] * r[1:] ** (k - n)) ** (1.0 / k)
    anti = cumulative_simpson(du, x=r, initial=0.0)

    if domain == "ball":
        u = anti - anti[-1]
        return RadialField(n=n, radius=big_r, r=r, u=u, du=du,
                           description=description)

    tail_power = (k - n) / k
    tail_coef = float((coef * moment[-1]) ** (1.0 / k))
    tail = tail_coef * big_r ** (tail_power + 1) / (-(tail_power + 1))
    u = anti - anti[-1] - tail
    return RadialField(n=n, radius=big_r, r=r, u=u, du=du, entire=True,
                       support_radius=f.support_radius, tail_coef=tail_coef,
                       tail_power=tail_power, description=description)


def quadratic_solution(n: int, k: int, radius: float, mode: str = "unit_rhs",
                       l: int | None = None,
                       samples: int = DEFAULT_SAMPLES) -> RadialField:
    """The quadratic profile w = c (r^2 - R^2) with the explicit constants.

    mode="unit_rhs":   c = (1/2) C(n,k)^{-1/k}, so F_k[w] = 1.
    mode="quotient":   (2c)^{k-l} = C(n,l)/C(n,k), so F_k[w] = F_l[w];
                       for l = k-1 this reduces to c = k/(2(n-k+1)).
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n={n}, got k={k}")
    if mode == "unit_rhs":
        c = 0.5 * comb(n, k) ** (-1.0 / k)
        desc = f"quadratic unit-rhs n={n} k={k} R={radius:g}"
    elif mode == "quotient":
        if l is None or not 1 <= l < k:
            raise ValueError(f"quotient mode needs 1 <= l < k, got l={l}, k={k}")
        c = 0.5 * (comb(n, l) / comb(n, k)) ** (1.0 / (k - l))
        desc = f"quadratic quotient n={n} k={k} l={l} R={radius:g}"
    else:
        raise ValueError(f"unknown mode {mode!r}")
    r = np.linspace(0.0, radius, samples)
    return RadialField(n=n, radius=radius, r=r, u=c * (r ** 2 - radius ** 2),
                       du=2 * c * r, description=desc)


def _tail_lq(u: RadialField, q: float) -> float:
    """Exact integral of |u|^q over |x| >= truncation radius (entire only)."""
    if not u.entire or u.tail_coef is None:
        return 0.0
    beta = -(u.tail_power + 1.0)  # |u| = B r^{-beta} beyond the support
    amp = u.tail_coef / beta
    if beta * q <= u.n:
        return inf
    big_r = u.radius
    return sphere_area(u.n) * amp ** q * big_r ** (u.n - beta * q) / (beta * q - u.n)


def radial_norm(u: RadialField, q: float, weight=None) -> float:
    """(sigma_{n-1} int |u|^q w(r) r^{n-1} dr)^{1/q} by composite Simpson."""
    if isinf(q):
        raise ValueError("the sup norm is not supported; use a finite q > 0")
    if q <= 0:
        raise ValueError(f"need q > 0, got {q}")
    if weight is None:
        w = 1.0
        tail = _tail_lq(u, q)
    else:
        w = weight(u.r) if callable(weight) else np.asarray(weight)
        tail = 0.0
    val = sphere_area(u.n) * float(
        simpson(np.abs(u.u) ** q * w * u.r ** (u.n - 1), x=u.r)) + tail
    return val ** (1.0 / q) if not isinf(val) else inf


def radial_grad_l2(u: RadialField) -> float:
    """L^2 norm of the gradient; infinite for slowly decaying entire tails."""
    val = sphere_area(u.n) * float(simpson(u.du ** 2 * u.r ** (u.n - 1), x=u.r))
    if u.entire and u.tail_coef is not None:
        expo = 2 * u.tail_power + u.n
        if expo >= 0:
            return inf
        val += sphere_area(u.n) * u.tail_coef ** 2 * u.radius ** expo / (-expo)
    return val ** 0.5


def radial_energy(u: RadialField, k: int) -> float:
    """int (-u) F_k[u] dx over the profile's domain; requires admissibility."""
    _require_admissible(u, k)
    fk = radial_fk(u, k)
    return sphere_area(u.n) * float(
        simpson(np.clip(-u.u, 0.0, None) * fk * u.r ** (u.n - 1), x=u.r))


def radial_mutual_energy(u: RadialField, v: RadialField, k: int) -> float:
    """int (-v) F_k[u] dx; the first argument is the one differentiated."""
    if u.n != v.n or not np.array_equal(u.r, v.r):
        raise ValueError("profiles must share dimension and r-grid")
    _require_admissible(u, k)
    _require_admissible(v, k)
    fk = radial_fk(u, k)
    return sphere_area(u.n) * float(
        simpson(np.clip(-v.u, 0.0, None) * fk * u.r ** (u.n - 1), x=u.r))


def dilate(u: RadialField, lam: float) -> RadialField:
    """The mass-preserving rescaling u_lam(r) = lam^{-2} u(lam r)."""
    tail_coef = None if u.tail_coef is None else u.tail_coef * lam ** (u.tail_power - 1)
    return replace(
        u, radius=u.radius / lam, r=u.r / lam, u=u.u / lam ** 2, du=u.du / lam,
        support_radius=None if u.support_radius is None else u.support_radius / lam,
        tail_coef=tail_coef,
        description=f"{u.description} dilated lam={lam:g}".strip())


def scale(u: RadialField, s: float) -> RadialField:
    """Amplitude scaling s * u."""
    tail_coef = None if u.tail_coef is None else u.tail_coef * s
    return replace(u, u=s * u.u, du=s * u.du, tail_coef=tail_coef,
                   description=f"{u.description} scaled s={s:g}".strip())


def add(u: RadialField, v: RadialField) -> RadialField:
    """Pointwise sum of two profiles on the same grid."""
    if u.n != v.n or not np.array_equal(u.r, v.r):
        raise ValueError("profiles must share dimension and r-grid")
    if u.entire or v.entire:
        raise ValueError("sums of entire profiles are not supported")
    return RadialField(n=u.n, radius=u.radius, r=u.r, u=u.u + v.u,
                       du=u.du + v.du,
                       description=f"({u.description})+({v.description})")
