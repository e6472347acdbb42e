"""Exponent bookkeeping for the k-Hessian inequality family.

All inequalities handled by this toolkit are governed by one exponent
set derived from the dimension n and the Hessian order k:

    alpha  = 2k/(k+1)          fractional smoothness order
    p      = k+1               nonlinearity exponent
    q_sob  = n(k+1)/(n-2k)     critical embedding exponent (needs 2k < n)
    q_dual = n(k+1)/((n+2)k)   Holder conjugate of q_sob

Geometric constants for balls and spheres live here as well because
every quadrature in the toolkit needs them.
"""

from dataclasses import dataclass, field
from math import gamma, pi


def ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n."""
    return pi ** (n / 2) / gamma(n / 2 + 1)


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^{n-1} in R^n."""
    return n * ball_volume(n)


@dataclass(frozen=True)
class ExponentSet:
    """Derived exponents for dimension ``n`` and Hessian order ``k``."""

    n: int
    k: int
    alpha: float = field(init=False)
    p: int = field(init=False)
    q_sob: float | None = field(init=False)
    q_dual: float = field(init=False)

    def __post_init__(self):
        n, k = self.n, self.k
        if not (1 <= k <= n):
            raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
        object.__setattr__(self, "alpha", 2.0 * k / (k + 1))
        object.__setattr__(self, "p", k + 1)
        q_sob = n * (k + 1) / (n - 2 * k) if 2 * k < n else None
        object.__setattr__(self, "q_sob", q_sob)
        object.__setattr__(self, "q_dual", n * (k + 1) / ((n + 2) * k))
        assert abs(self.alpha * self.p - 2 * k) < 1e-12
        if q_sob is not None:
            assert abs((1 - 2 * k / n) * q_sob / (k + 1) - 1.0) < 1e-12

    @property
    def subcritical(self) -> bool:
        """True when 2k < n, i.e. the critical exponent exists."""
        return 2 * self.k < self.n

    def trace_ball_exponent(self, q: float) -> float:
        """Ball-growth exponent (1 - 2k/n) q/(k+1) of the admissibility test."""
        return (1 - 2 * self.k / self.n) * q / (self.k + 1)
