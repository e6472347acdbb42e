"""Seeded generators of admissible test inputs.

Ball profiles come from two constructions:

* solving F_k[u] = f for random nonnegative bump densities f, which is
  admissible by construction (for radial profiles, F_k >= 0 forces
  F_j >= 0 for j < k), and
* perturbed quadratics u = c (|x|^2 - R^2)(1 + eps g) with a smooth
  trigonometric bump g, rejection-sampled on the k-convexity test with
  eps halved until accepted.  These have exact zero boundary values and
  tunable anisotropy.

Everything is driven by a numpy Generator so suites reproduce exactly
from a seed.
"""

import numpy as np

from .grid import GridField, grid_from_function, is_k_convex
from .radial import RadialDensity, RadialField, quadratic_solution, solve_radial


def rng_for(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, key)]))


def bump_density(n: int, rng: np.random.Generator, support: float = 1.0,
                 samples: int = 2001, bumps: int = 3) -> RadialDensity:
    """A random nonnegative radial density, compactly supported."""
    r = np.linspace(0.0, support, samples)
    vals = np.zeros_like(r)
    for _ in range(bumps):
        amp = rng.uniform(0.2, 1.0)
        center = rng.uniform(0.0, 0.7 * support)
        width = rng.uniform(0.15, 0.4) * support
        vals += amp * np.exp(-((r - center) / width) ** 2)
    cutoff = np.clip(1.0 - (r / support) ** 2, 0.0, None) ** 2
    return RadialDensity(n=n, r=r, values=vals * cutoff,
                         description=f"bump density n={n}")


def radial_admissible(n: int, k: int, radius: float, rng: np.random.Generator,
                      samples: int = 10_000) -> RadialField:
    """A random admissible ball profile (k-convex, <= 0, zero boundary)."""
    f = bump_density(n, rng, support=radius)
    amp = rng.uniform(0.5, 2.0)
    f = RadialDensity(n=n, r=f.r, values=amp * f.values, description=f.description)
    u = solve_radial(f, k, domain="ball", radius=radius, samples=samples)
    if rng.random() < 0.3:
        w = quadratic_solution(n, k, radius, samples=samples)
        s = rng.uniform(0.2, 1.5)
        u = RadialField(n=n, radius=radius, r=u.r, u=u.u + s * w.u,
                        du=u.du + s * w.du, description="bump+quadratic")
    return u


def radial_family(n: int, k: int, radius: float, count: int, seed: int,
                  samples: int = 10_000, stream: int = 0) -> list:
    rng = rng_for(seed, 1, stream)
    return [radial_admissible(n, k, radius, rng, samples) for _ in range(count)]


def trig_bump(n: int, rng: np.random.Generator, waves: int = 2):
    """A smooth O(1) trigonometric perturbation g(x)."""
    freqs = rng.uniform(0.5, 2.0, size=(waves, n))
    phases = rng.uniform(0.0, 2 * np.pi, size=waves)
    amps = rng.uniform(0.3, 1.0, size=waves)
    amps /= amps.sum()

    def g(pts):
        acc = np.zeros(pts.shape[:-1])
        for m in range(waves):
            acc += amps[m] * np.cos(np.tensordot(pts, freqs[m], axes=([-1], [0]))
                                    + phases[m])
        return acc

    return g


def grid_quadratic(n: int, k: int, radius: float, resolution: int) -> GridField:
    """The unit-rhs quadratic sampled on a grid."""
    from math import comb
    c = 0.5 * comb(n, k) ** (-1.0 / k)
    return grid_from_function(
        lambda pts: c * (np.sum(pts ** 2, axis=-1) - radius ** 2),
        n, radius, resolution, description=f"quadratic unit-rhs n={n} k={k}")


def grid_admissible(n: int, k: int, radius: float, resolution: int,
                    rng: np.random.Generator, eps: float = 0.15,
                    max_halvings: int = 6) -> GridField:
    """A perturbed quadratic grid field, rejection-sampled on k-convexity."""
    from math import comb
    c = 0.5 * comb(n, k) ** (-1.0 / k)
    g = trig_bump(n, rng)
    scale = rng.uniform(0.5, 1.5)
    for _ in range(max_halvings):
        def u_fn(pts, eps=eps):
            base = scale * c * (np.sum(pts ** 2, axis=-1) - radius ** 2)
            return base * (1.0 + eps * g(pts))

        field = grid_from_function(u_fn, n, radius, resolution,
                                   description=f"perturbed quadratic eps={eps:.3g}")
        if is_k_convex(field, k):
            return field
        eps *= 0.5
    return grid_from_function(
        lambda pts: scale * c * (np.sum(pts ** 2, axis=-1) - radius ** 2),
        n, radius, resolution, description="quadratic (perturbation rejected)")


def grid_family(n: int, k: int, radius: float, resolution: int, count: int,
                seed: int, stream: int = 0) -> list:
    rng = rng_for(seed, 2, stream)
    return [grid_admissible(n, k, radius, resolution, rng) for _ in range(count)]


def box_lebesgue(n: int, half_width: float, resolution: int) -> GridField:
    """Lebesgue measure restricted to a box, as a grid density.

    The mask radius exceeds the box diagonal so every node counts with
    full cell weight; node masses are exactly h^n.
    """
    h = 2.0 * half_width / (resolution - 1)
    return GridField(
        n=n, shape=(resolution,) * n, spacing=h,
        center=tuple(0.0 for _ in range(n)),
        radius=10.0 * half_width * np.sqrt(n),
        values=np.ones((resolution,) * n),
        description=f"lebesgue box half_width={half_width:g}")


def sobolev_bump_family(n: int, count: int, seed: int, support: float = 1.0,
                        samples: int = 2001) -> list:
    """Single-bump densities of varying width/amplitude for embedding tests."""
    rng = rng_for(seed, 3)
    out = []
    r = np.linspace(0.0, support, samples)
    for _ in range(count):
        width = rng.uniform(0.25, 0.6) * support
        amp = rng.uniform(0.5, 2.0)
        secondary = rng.uniform(0.0, 0.15)
        vals = amp * (np.exp(-(r / width) ** 2)
                      + secondary * np.exp(-((r - 0.5 * support) / (0.3 * support)) ** 2))
        cutoff = np.clip(1.0 - (r / support) ** 2, 0.0, None) ** 2
        out.append(RadialDensity(n=n, r=r, values=vals * cutoff,
                                 description=f"sobolev bump width={width:.3g}"))
    return out
