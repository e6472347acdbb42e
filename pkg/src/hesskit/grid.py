"""Grid-sampled fields on a ball and the discrete k-Hessian machinery.

A ``GridField`` samples a scalar function on a uniform Cartesian box that
strictly contains the ball domain; the mask marks nodes inside the ball.
Hessians are second-order central differences (compact stencil on the
diagonal, four-point cross stencil off the diagonal); the outermost box
layers fall back to one-sided second-order stencils, which only matters
for nodes outside the mask.

Integration is a midpoint rule over node-centered cells with
fraction-inside weights for cells straddling the sphere (3^n subsamples
per straddling cell), which keeps the rule second-order without meshing
the boundary.

The convexity curve of a pair (u, v),

    h(t)   = int -(u + t v) F_k[u + t v],
    h'(t)  = (k+1) int (-v) F_k[u + t v],
    h''(t) = (k+1) int (-v) sum_ij v_ij (dS_k/dM)_ij at M = D^2(u + t v),

drives the energy inequality verifiers; h'' uses the derivative identity
for S_k along matrix lines in production, with finite differences of h'
kept as the independent test oracle.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np

from . import kernels
from .errors import NotAdmissibleError


@dataclass(frozen=True)
class GridField:
    """Scalar samples on a uniform box grid with a ball-domain mask."""

    n: int
    shape: tuple
    spacing: float
    center: tuple
    radius: float
    values: np.ndarray
    description: str = ""

    def __post_init__(self):
        if not 2 <= self.n <= 4:
            raise ValueError(f"grid fields support 2 <= n <= 4, got n={self.n}")
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != tuple(self.shape):
            raise ValueError(f"values shape {vals.shape} != grid shape {self.shape}")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if len(self.center) != self.n or len(self.shape) != self.n:
            raise ValueError("center/shape length must equal the dimension")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        if not np.isfinite(vals[self.mask]).all():
            raise ValueError("values must be finite on masked nodes")

    @property
    def axes(self):
        return [self.center[i] + self.spacing *
                (np.arange(self.shape[i]) - (self.shape[i] - 1) / 2)
                for i in range(self.n)]

    @property
    def points(self) -> np.ndarray:
        return np.stack(np.meshgrid(*self.axes, indexing="ij"), axis=-1)

    @property
    def distances(self) -> np.ndarray:
        d2 = np.zeros(self.shape)
        for i, ax in enumerate(self.axes):
            sl = [None] * self.n
            sl[i] = slice(None)
            d2 = d2 + (ax[tuple(sl)] - self.center[i]) ** 2
        return np.sqrt(d2)

    @property
    def mask(self) -> np.ndarray:
        return self.distances < self.radius

    def with_values(self, values, description=None) -> "GridField":
        return GridField(self.n, self.shape, self.spacing, self.center,
                         self.radius, values,
                         self.description if description is None else description)

    def same_geometry(self, other: "GridField") -> bool:
        return (self.n == other.n and self.shape == other.shape
                and self.spacing == other.spacing
                and self.center == other.center and self.radius == other.radius)


def grid_from_function(fn, n, radius, resolution, center=None, margin_cells=2,
                       description="") -> GridField:
    """Sample ``fn`` (vectorized over trailing axis) on a box around the ball.

    The box half-width is radius + margin_cells * spacing so every masked
    node has a full central stencil.
    """
    if resolution < 2 * margin_cells + 4:
        raise ValueError("resolution too small for the stencil margin")
    center = tuple(0.0 for _ in range(n)) if center is None else tuple(center)
    h = 2.0 * radius / (resolution - 1 - 2 * margin_cells)
    axes = [c + np.linspace(-(radius + margin_cells * h), radius + margin_cells * h,
                            resolution) for c in center]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    return GridField(n=n, shape=(resolution,) * n, spacing=h, center=center,
                     radius=radius, values=np.asarray(fn(pts), dtype=np.float64),
                     description=description)


def _sl(ndim, axis, s):
    out = [slice(None)] * ndim
    out[axis] = s
    return tuple(out)


def _d1(vals, axis, h):
    """Second-order first derivative: central inside, 3-point at the edges."""
    nd = vals.ndim
    out = np.empty_like(vals)
    out[_sl(nd, axis, slice(1, -1))] = (
        vals[_sl(nd, axis, slice(2, None))] - vals[_sl(nd, axis, slice(0, -2))]
    ) / (2 * h)
    out[_sl(nd, axis, 0)] = (
        -3 * vals[_sl(nd, axis, 0)] + 4 * vals[_sl(nd, axis, 1)]
        - vals[_sl(nd, axis, 2)]) / (2 * h)
    out[_sl(nd, axis, -1)] = (
        3 * vals[_sl(nd, axis, -1)] - 4 * vals[_sl(nd, axis, -2)]
        + vals[_sl(nd, axis, -3)]) / (2 * h)
    return out


def _d2(vals, axis, h):
    """Second-order second derivative: compact central, one-sided at edges."""
    nd = vals.ndim
    out = np.empty_like(vals)
    out[_sl(nd, axis, slice(1, -1))] = (
        vals[_sl(nd, axis, slice(2, None))] - 2 * vals[_sl(nd, axis, slice(1, -1))]
        + vals[_sl(nd, axis, slice(0, -2))]) / h ** 2
    out[_sl(nd, axis, 0)] = (
        2 * vals[_sl(nd, axis, 0)] - 5 * vals[_sl(nd, axis, 1)]
        + 4 * vals[_sl(nd, axis, 2)] - vals[_sl(nd, axis, 3)]) / h ** 2
    out[_sl(nd, axis, -1)] = (
        2 * vals[_sl(nd, axis, -1)] - 5 * vals[_sl(nd, axis, -2)]
        + 4 * vals[_sl(nd, axis, -3)] - vals[_sl(nd, axis, -4)]) / h ** 2
    return out


def hessian_fd(u: GridField) -> np.ndarray:
    """Discrete Hessian, shape (*grid, n, n); symmetric by construction."""
    if min(u.shape) < 4:
        raise ValueError("grid too small for the Hessian stencil (need >= 4/axis)")
    n, h = u.n, u.spacing
    out = np.empty(u.shape + (n, n))
    firsts = [_d1(u.values, a, h) for a in range(n)]
    for i in range(n):
        out[..., i, i] = _d2(u.values, i, h)
        for j in range(i + 1, n):
            mixed = _d1(firsts[j], i, h)
            out[..., i, j] = mixed
            out[..., j, i] = mixed
    return out


def gradient_fd(u: GridField) -> np.ndarray:
    """Discrete gradient, shape (*grid, n)."""
    return np.stack([_d1(u.values, a, u.spacing) for a in range(u.n)], axis=-1)


_WEIGHT_CACHE: dict = {}


def ball_weights(u: GridField) -> np.ndarray:
    """Fraction of each node-centered cell lying inside the ball.

    Cells fully inside get weight 1, cells straddling the sphere get a
    3^n-subsample estimate, everything else 0.  Straddling cells are
    weighted whether or not their node is masked, which completes the
    boundary band symmetrically.
    """
    key = (u.n, u.shape, u.spacing, u.center, u.radius)
    cached = _WEIGHT_CACHE.get(key)
    if cached is not None:
        return cached
    h = u.spacing
    dist = u.distances
    half_diag = 0.5 * h * np.sqrt(u.n)
    w = np.zeros(u.shape)
    w[dist <= u.radius - half_diag] = 1.0
    straddle = (dist > u.radius - half_diag) & (dist < u.radius + half_diag)
    if straddle.any():
        pts = u.points[straddle]
        offsets = np.array(list(product((-h / 3, 0.0, h / 3), repeat=u.n)))
        sub = pts[:, None, :] + offsets[None, :, :]
        inside = np.linalg.norm(sub - np.asarray(u.center), axis=-1) < u.radius
        w[straddle] = inside.mean(axis=1)
    if len(_WEIGHT_CACHE) > 32:
        _WEIGHT_CACHE.clear()
    _WEIGHT_CACHE[key] = w
    return w


def integrate(f: GridField) -> float:
    """Midpoint-rule integral over the ball with fractional boundary cells."""
    return float(np.sum(ball_weights(f) * f.values)) * f.spacing ** f.n


def _integrate_values(geom: GridField, values: np.ndarray) -> float:
    return float(np.sum(ball_weights(geom) * values)) * geom.spacing ** geom.n


def fk_field(u: GridField, k: int) -> GridField:
    """Pointwise F_k of the discrete Hessian on the mask, zero outside."""
    if not 1 <= k <= u.n:
        raise ValueError(f"need 1 <= k <= n={u.n}, got k={k}")
    hess = hessian_fd(u)
    mask = u.mask
    vals = np.zeros(u.shape)
    vals[mask] = kernels.sigma_batch(hess[mask], k)
    return u.with_values(vals, description=f"F_{k}[{u.description}]")


def _sigma_table(u: GridField, k: int):
    """(mask, S_0..S_k at masked nodes, Hessian) helper shared by checks."""
    hess = hessian_fd(u)
    mask = u.mask
    return mask, kernels.sigma_all_batch(hess[mask], k), hess


def default_convexity_tol(s_table: np.ndarray) -> float:
    """1e-8 times the scale of F_1, the finite-difference noise floor."""
    return 1e-8 * max(1.0, float(np.abs(s_table[:, 1]).max(initial=0.0)))


def is_k_convex(u: GridField, k: int, tol: float | None = None) -> bool:
    """True iff F_j >= -tol on the mask for every j = 1..k."""
    _, s, _ = _sigma_table(u, k)
    if tol is None:
        tol = default_convexity_tol(s)
    return bool((s[:, 1:] >= -tol).all())


def _require_admissible(u: GridField, k: int, tol: float | None = None):
    mask, s, _ = _sigma_table(u, k)
    if tol is None:
        tol = default_convexity_tol(s)
    flat_j, flat_i = np.unravel_index(np.argmin(s[:, 1:].T), s[:, 1:].T.shape)
    worst = s[:, 1:][flat_i, flat_j]
    if worst < -tol:
        node = tuple(int(x) for x in np.argwhere(mask)[flat_i])
        raise NotAdmissibleError(
            f"field is not {k}-convex: F_{flat_j + 1} = {worst:.3e} at node {node}",
            worst_index=node, worst_value=float(worst))
    utol = 1e-8 * max(1.0, float(np.abs(u.values[mask]).max(initial=0.0)))
    masked_vals = u.values[mask]
    i = int(np.argmax(masked_vals))
    if masked_vals[i] > utol:
        node = tuple(int(x) for x in np.argwhere(mask)[i])
        raise NotAdmissibleError(
            f"field must be nonpositive on the ball: u = {masked_vals[i]:.3e} "
            f"at node {node}", worst_index=node, worst_value=float(masked_vals[i]))


def hessian_energy(u: GridField, k: int) -> float:
    """int (-u) F_k[u] over the ball; requires k-convex, nonpositive u."""
    _require_admissible(u, k)
    fk = fk_field(u, k)
    return _integrate_values(u, np.clip(-u.values, 0.0, None) * fk.values)


def mutual_energy(u: GridField, v: GridField, k: int) -> float:
    """int (-v) F_k[u]: the first argument is differentiated, the second
    multiplies.  Non-commutative for k >= 2."""
    if not u.same_geometry(v):
        raise ValueError("fields must share grid geometry")
    _require_admissible(u, k)
    _require_admissible(v, k)
    fk = fk_field(u, k)
    return _integrate_values(u, np.clip(-v.values, 0.0, None) * fk.values)


def grad_l2(u: GridField) -> float:
    """L^2 norm of the discrete gradient over the ball."""
    g = gradient_fd(u)
    return _integrate_values(u, np.sum(g * g, axis=-1)) ** 0.5


@dataclass(frozen=True)
class HCurve:
    """Samples of the convexity curve h and its two derivatives."""

    t: np.ndarray
    h: np.ndarray
    dh: np.ndarray
    d2h: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("t-samples must increase strictly")


def h_curve(u: GridField, v: GridField, k: int, t_samples) -> HCurve:
    """Evaluate h, h', h'' of the pair (u, v) at each t in ``t_samples``."""
    if not u.same_geometry(v):
        raise ValueError("fields must share grid geometry")
    ts = np.asarray(t_samples, dtype=np.float64)
    mask = u.mask
    hu = hessian_fd(u)[mask]
    hv = hessian_fd(v)[mask]
    wu, wv = u.values[mask], v.values[mask]
    wts = ball_weights(u)[mask]
    cell = u.spacing ** u.n
    hs = np.empty(ts.size)
    dhs = np.empty(ts.size)
    d2hs = np.empty(ts.size)
    for idx, t in enumerate(ts):
        mats = hu + t * hv
        s = kernels.sigma_all_batch(mats, k)
        tol = default_convexity_tol(s)
        if (s[:, 1:] < -tol).any():
            raise NotAdmissibleError(
                f"u + t v is not {k}-convex at t = {t:g}",
                worst_value=float(s[:, 1:].min()))
        combo = wu + t * wv
        if combo.max(initial=0.0) > 1e-8 * max(1.0, float(np.abs(combo).max())):
            raise NotAdmissibleError(f"u + t v is not nonpositive at t = {t:g}")
        fk = s[:, k]
        hs[idx] = float(np.sum(wts * (-combo) * fk)) * cell
        dhs[idx] = (k + 1) * float(np.sum(wts * (-wv) * fk)) * cell
        contract = kernels.sigma_grad_contract_batch(mats, hv, k)
        d2hs[idx] = (k + 1) * float(np.sum(wts * (-wv) * contract)) * cell
    return HCurve(t=ts, h=hs, dh=dhs, d2h=d2hs)


def reilly_residual(u: GridField, v: GridField, k: int, t: float = 0.0,
                    dt: float = 1e-4) -> float:
    """Max-over-mask residual of the t-derivative identity for S_k.

    Compares a central finite difference in t of S_k(D^2(u + t v))
    against sum_ij v_ij (dS_k/dM)_ij at D^2(u + t v); ``dt`` is the
    reported finite-difference step.
    """
    if not u.same_geometry(v):
        raise ValueError("fields must share grid geometry")
    mask = u.mask
    hu = hessian_fd(u)[mask]
    hv = hessian_fd(v)[mask]
    fd = (kernels.sigma_batch(hu + (t + dt) * hv, k)
          - kernels.sigma_batch(hu + (t - dt) * hv, k)) / (2 * dt)
    contract = kernels.sigma_grad_contract_batch(hu + t * hv, hv, k)
    return float(np.abs(fd - contract).max())


def _interior_mask(u: GridField, cells: int = 3) -> np.ndarray:
    """Nodes at least ``cells`` layers inside both the box and the ball."""
    inner = u.distances <= u.radius - cells * u.spacing
    for axis in range(u.n):
        idx = np.arange(u.shape[axis])
        ok = (idx >= cells) & (idx <= u.shape[axis] - 1 - cells)
        sl = [None] * u.n
        sl[axis] = slice(None)
        inner = inner & ok[tuple(sl)]
    return inner


def divergence_identity_residual(u: GridField, k: int) -> float:
    """Max residual of S_k = (1/k) sum_j D_j(D_i u  (dS_k/dM)_ij).

    The outer divergence is discrete, so the residual is O(h^2) for
    smooth non-quadratic fields and roundoff for quadratics.
    """
    hess = hessian_fd(u)
    grads = kernels.sigma_grad_batch(
        hess.reshape(-1, u.n, u.n), k).reshape(u.shape + (u.n, u.n))
    du = gradient_fd(u)
    flux = np.einsum("...i,...ij->...j", du, grads)
    div = np.zeros(u.shape)
    for j in range(u.n):
        div += _d1(flux[..., j], j, u.spacing)
    sk = np.zeros(u.shape)
    sk_flat = kernels.sigma_batch(hess.reshape(-1, u.n, u.n), k)
    sk = sk_flat.reshape(u.shape)
    inner = _interior_mask(u)
    return float(np.abs(div / k - sk)[inner].max())


def null_divergence_residual(u: GridField, k: int) -> float:
    """Max over rows i of |sum_j D_j (dS_k/dM)_ij|; O(h^2) for smooth u."""
    hess = hessian_fd(u)
    grads = kernels.sigma_grad_batch(
        hess.reshape(-1, u.n, u.n), k).reshape(u.shape + (u.n, u.n))
    inner = _interior_mask(u)
    worst = 0.0
    for i in range(u.n):
        div = np.zeros(u.shape)
        for j in range(u.n):
            div += _d1(grads[..., i, j], j, u.spacing)
        worst = max(worst, float(np.abs(div)[inner].max()))
    return worst
