"""Inequality verifiers.

Each verifier evaluates both sides of one inequality on concrete inputs
and returns a structured report.  Constants come in three flavors:

* paper-sharp: the constant is exact and an equality witness exists
  (the energy-Schwarz inequality, the ball Poincare family);
* paper-explicit: the constant is explicit but not claimed sharp
  (the general-order Poincare comparison);
* empirical: no constant is available, so the verifier reports the
  observed ratio, and suites assert stability/invariance of that ratio
  across seeded families instead of a fixed bound.

Orientation convention: the mutual energy pairs (-v) against F_k[u], so
the FIRST argument is the differentiated one.  The pairing is
non-commutative for k >= 2; both orientations satisfy the Schwarz bound
with the exponents k/(k+1) on the differentiated side's energy and
1/(k+1) on the multiplier's.

The Minkowski comparison reads the energy of the sum as the energy of
the FUNCTION sum u + v (the curve value h(1)); the operator is nonlinear
so this differs from summing the two Hessian measures.
"""

from math import comb, inf, isinf

import numpy as np
from scipy.integrate import simpson

from . import grid as gridmod
from . import radial as radmod
from .exponents import ExponentSet, sphere_area
from .measures import (DiscreteMeasure, PotentialParams, lq_norm_radial,
                       wolff_radial_profile)
from .radial import RadialDensity, RadialField
from .reports import InequalityReport, SandwichReport, make_report


def _is_radial(u) -> bool:
    return isinstance(u, RadialField)


def _resolution(u):
    return u.samples if _is_radial(u) else "x".join(map(str, u.shape))


def energy(u, k: int) -> float:
    return radmod.radial_energy(u, k) if _is_radial(u) else gridmod.hessian_energy(u, k)


def mutual(u, v, k: int) -> float:
    if _is_radial(u):
        return radmod.radial_mutual_energy(u, v, k)
    return gridmod.mutual_energy(u, v, k)


def weighted_energy(u, j: int) -> float:
    """int (-u) F_j[u] with the convention F_0 = 1."""
    if _is_radial(u):
        neg = np.clip(-u.u, 0.0, None)
        fj = np.ones_like(u.u) if j == 0 else radmod.radial_fk(u, j)
        return sphere_area(u.n) * float(simpson(neg * fj * u.r ** (u.n - 1), x=u.r))
    neg = np.clip(-u.values, 0.0, None)
    if j == 0:
        vals = np.where(u.mask, neg, 0.0)
    else:
        vals = neg * gridmod.fk_field(u, j).values
    return gridmod._integrate_values(u, vals)


def l1_norm(u) -> float:
    return weighted_energy(u, 0)


def lq_norm(u, q: float) -> float:
    if _is_radial(u):
        return radmod.radial_norm(u, q)
    vals = np.where(u.mask, np.abs(u.values) ** q, 0.0)
    return gridmod._integrate_values(u, vals) ** (1.0 / q)


def grad_norm(u) -> float:
    return radmod.radial_grad_l2(u) if _is_radial(u) else gridmod.grad_l2(u)


def _sum_fields(u, v):
    if _is_radial(u):
        return radmod.add(u, v)
    if not u.same_geometry(v):
        raise ValueError("fields must share grid geometry")
    return u.with_values(u.values + v.values,
                         description=f"({u.description})+({v.description})")


def _witness(u, v=None):
    w = {"u": u.description or "anonymous", "resolution": _resolution(u)}
    if v is not None:
        w["v"] = v.description or "anonymous"
    return w


def verify_schwarz(u, v, k: int, tolerance: float = 1e-4,
                   equality_case: bool = False) -> InequalityReport:
    """Energy-Schwarz: mutual(u, v) <= E(u)^{k/(k+1)} E(v)^{1/(k+1)}."""
    lhs = mutual(u, v, k)
    eu, ev = energy(u, k), energy(v, k)
    rhs = eu ** (k / (k + 1)) * ev ** (1 / (k + 1))
    return make_report("schwarz", lhs, rhs, constant_used=1.0,
                       constant_source="paper-sharp", tolerance=tolerance,
                       equality_case=equality_case,
                       params={"n": u.n, "k": k, "resolution": _resolution(u)},
                       witness=_witness(u, v))


def verify_minkowski(u, v, k: int, tolerance: float = 1e-4,
                     equality_case: bool = False) -> InequalityReport:
    """E(u+v)^{1/(k+1)} <= E(u)^{1/(k+1)} + E(v)^{1/(k+1)}."""
    w = _sum_fields(u, v)
    lhs = energy(w, k) ** (1 / (k + 1))
    rhs = energy(u, k) ** (1 / (k + 1)) + energy(v, k) ** (1 / (k + 1))
    return make_report("minkowski", lhs, rhs, constant_used=1.0,
                       constant_source="paper-sharp", tolerance=tolerance,
                       equality_case=equality_case,
                       params={"n": u.n, "k": k, "resolution": _resolution(u)},
                       witness=_witness(u, v))


def verify_h_convexity(u, v, k: int, t_samples=None,
                       tolerance: float = 1e-6) -> InequalityReport:
    """h h'' >= (k/(k+1)) (h')^2 along the segment, i.e. h^{1/(k+1)} convex."""
    if t_samples is None:
        t_samples = np.linspace(0.0, 1.0, 21)
    curve = gridmod.h_curve(u, v, k, t_samples)
    slack = curve.h * curve.d2h - (k / (k + 1)) * curve.dh ** 2
    allow = tolerance * float(np.max(curve.h * curve.d2h, initial=0.0))
    worst = float(slack.min())
    return make_report("h-convexity", max(0.0, -worst), max(allow, 0.0),
                       constant_used=k / (k + 1), constant_source="paper-sharp",
                       tolerance=0.0,
                       params={"n": u.n, "k": k, "t_samples": len(t_samples),
                               "resolution": _resolution(u)},
                       witness={**_witness(u, v), "min_slack": worst})


def _quadratic_like(u, k: int, mode: str = "unit_rhs", l: int | None = None):
    """The explicit quadratic on the same discretization as ``u``."""
    if _is_radial(u):
        return radmod.quadratic_solution(u.n, k, u.radius, mode=mode, l=l,
                                         samples=u.samples)
    if mode == "unit_rhs":
        c = 0.5 * comb(u.n, k) ** (-1.0 / k)
    else:
        c = 0.5 * (comb(u.n, l) / comb(u.n, k)) ** (1.0 / (k - l))
    pts = u.points
    ctr = np.asarray(u.center)
    vals = c * (np.sum((pts - ctr) ** 2, axis=-1) - u.radius ** 2)
    return u.with_values(vals, description=f"quadratic {mode}")


def verify_poincare_l1(u, k: int, tolerance: float = 1e-4,
                       equality_case: bool = False) -> InequalityReport:
    """int(-u) <= C (int (-u) F_k[u])^{1/(k+1)}, C from the unit-rhs solution."""
    if _is_radial(u) and u.entire:
        raise ValueError("the L1 comparison needs a ball domain")
    w = _quadratic_like(u, k, "unit_rhs")
    c_const = l1_norm(w) ** (k / (k + 1))
    lhs = l1_norm(u)
    rhs = c_const * energy(u, k) ** (1 / (k + 1))
    return make_report("poincare-l1", lhs, rhs, constant_used=c_const,
                       constant_source="paper-sharp", tolerance=tolerance,
                       equality_case=equality_case,
                       params={"n": u.n, "k": k, "radius": u.radius,
                               "resolution": _resolution(u)},
                       witness=_witness(u))


def _unit_ball_l1_weight(n: int, samples: int = 10_000) -> float:
    """int over the unit ball of (1 - |x|^2), by the same radial quadrature."""
    rho = np.linspace(0.0, 1.0, samples)
    return sphere_area(n) * float(simpson((1 - rho ** 2) * rho ** (n - 1), x=rho))


def verify_poincare_ball_scaled(u, k: int, tolerance: float = 1e-4,
                                equality_case: bool = False) -> InequalityReport:
    """Scale-normalized ball comparison.

    R^{-n} int |u| <= C (R^{2k-n} int |u| F_k[u])^{1/(k+1)}, with the
    sharp constant C = (c J)^{k/(k+1)} where c = (1/2) C(n,k)^{-1/k} and
    J = int_{B_1} (1 - |x|^2) dx.  The ratio is dilation-invariant.
    """
    big_r = u.radius
    n = u.n
    c_quad = 0.5 * comb(n, k) ** (-1.0 / k)
    samples = u.samples if _is_radial(u) else 10_000
    c_const = (c_quad * _unit_ball_l1_weight(n, samples)) ** (k / (k + 1))
    lhs = big_r ** (-n) * l1_norm(u)
    rhs = c_const * (big_r ** (2 * k - n) * energy(u, k)) ** (1 / (k + 1))
    return make_report("poincare-ball-scaled", lhs, rhs, constant_used=c_const,
                       constant_source="paper-sharp", tolerance=tolerance,
                       equality_case=equality_case,
                       params={"n": n, "k": k, "radius": big_r,
                               "resolution": _resolution(u)},
                       witness=_witness(u))


def verify_poincare_quotient(u, k: int, tolerance: float = 1e-4,
                             equality_case: bool = False) -> InequalityReport:
    """(int (-u) F_{k-1}[u])^{1/k} <= C (int (-u) F_k[u])^{1/(k+1)}.

    C = (int (-w) F_k[w])^{1/(k(k+1))} with w the quadratic solving
    F_k[w] = F_{k-1}[w]; k = 1 reduces to the L1 comparison via F_0 = 1.
    """
    if k >= 2:
        w = _quadratic_like(u, k, "quotient", l=k - 1)
    else:
        w = _quadratic_like(u, k, "unit_rhs")
    c_const = energy(w, k) ** (1.0 / (k * (k + 1)))
    lhs = weighted_energy(u, k - 1) ** (1.0 / k)
    rhs = c_const * energy(u, k) ** (1.0 / (k + 1))
    return make_report("poincare-quotient", lhs, rhs, constant_used=c_const,
                       constant_source="paper-sharp", tolerance=tolerance,
                       equality_case=equality_case,
                       params={"n": u.n, "k": k, "radius": u.radius,
                               "resolution": _resolution(u)},
                       witness=_witness(u))


def verify_poincare_general(u, k: int, l: int, tolerance: float = 1e-4,
                            extrapolated: bool = False) -> InequalityReport:
    """(int (-u) F_l[u])^{1/(l+1)} <= C (int (-u) F_k[u])^{1/(k+1)}.

    C = k^k / (l^l (k-l)^{k-l}) * (int (-w) F_k[w])^{(k-l)/((l+1)(k+1))}
    with w the quadratic solving F_k[w] = F_l[w].  The constant is
    explicit but not sharp (it comes from a scaling minimization), so
    equality at u = w is not expected.  The stated range is 2 <= l < k;
    l = 1 is accepted only behind ``extrapolated=True`` and flagged.
    """
    if not 1 <= l < k:
        raise ValueError(f"need 1 <= l < k, got l={l}, k={k}")
    if l == 1 and not extrapolated:
        raise ValueError("l = 1 is outside the stated range; "
                         "pass extrapolated=True to evaluate it anyway")
    w = _quadratic_like(u, k, "quotient", l=l)
    factor = k ** k / (l ** l * (k - l) ** (k - l))
    c_const = factor * energy(w, k) ** ((k - l) / ((l + 1) * (k + 1)))
    lhs = weighted_energy(u, l) ** (1.0 / (l + 1))
    rhs = c_const * energy(u, k) ** (1.0 / (k + 1))
    return make_report("poincare-general", lhs, rhs, constant_used=c_const,
                       constant_source="paper-explicit", tolerance=tolerance,
                       params={"n": u.n, "k": k, "l": l, "radius": u.radius,
                               "resolution": _resolution(u),
                               "extrapolated": extrapolated},
                       witness=_witness(u))


def _empirical(name, lhs, base, constant, tolerance, params, witness):
    if constant is None:
        constant = lhs / base if base > 0 else 0.0
        witness = dict(witness or {})
        witness["self_normalized"] = True
    return make_report(name, lhs, constant * base, constant_used=constant,
                       constant_source="empirical", tolerance=tolerance,
                       params=params, witness=witness)


def verify_gradient_poincare(u, k: int, constant: float | None = None,
                             tolerance: float = 1e-4) -> InequalityReport:
    """||Du||_2 <= C E(u)^{1/(k+1)}, empirical C.

    For k = 1 the squared left side equals the energy exactly in the
    continuum (integration by parts), which suites check separately.
    """
    lhs = grad_norm(u)
    base = energy(u, k) ** (1 / (k + 1))
    return _empirical("gradient-poincare", lhs, base, constant, tolerance,
                      params={"n": u.n, "k": k, "radius": u.radius,
                              "resolution": _resolution(u)},
                      witness=_witness(u))


def verify_sobolev(u, k: int, q: float, constant: float | None = None,
                   tolerance: float = 1e-4) -> InequalityReport:
    """||u||_q <= C E(u)^{1/(k+1)} for 0 < q <= q_sob (2k < n)."""
    es = ExponentSet(u.n, k)
    if not es.subcritical:
        raise ValueError("the embedding needs 2k < n")
    if not 0 < q <= es.q_sob + 1e-12:
        raise ValueError(f"need 0 < q <= {es.q_sob:.6g}, got {q}")
    lhs = lq_norm(u, q)
    base = energy(u, k) ** (1 / (k + 1))
    return _empirical("sobolev", lhs, base, constant, tolerance,
                      params={"n": u.n, "k": k, "q": q,
                              "resolution": _resolution(u)},
                      witness=_witness(u))


def verify_dual_sobolev(f: RadialDensity, k: int, constant: float | None = None,
                        tolerance: float = 1e-4,
                        samples: int = 10_000) -> InequalityReport:
    """E(v)^{1/(k+1)} <= C ||F_k[v]||_{q'} with q' = n(k+1)/((n+2)k).

    ``v`` solves F_k[v] = f on the ball spanned by the density grid.
    """
    es = ExponentSet(f.n, k)
    v = radmod.solve_radial(f, k, domain="ball", samples=samples)
    lhs = energy(v, k) ** (1 / (k + 1))
    qp = es.q_dual
    base = (sphere_area(f.n) * float(
        simpson(f.values ** qp * f.r ** (f.n - 1), x=f.r))) ** (1 / qp)
    return _empirical("dual-sobolev", lhs, base, constant, tolerance,
                      params={"n": f.n, "k": k, "q": qp, "resolution": samples},
                      witness={"f": f.description or "anonymous"})


def verify_trace(u: RadialField, omega, k: int, q: float, kappa: float,
                 constant: float | None = None,
                 tolerance: float = 1e-4) -> InequalityReport:
    """||u||_{L^q(omega)} <= C kappa^{1/q} E(u)^{1/(k+1)} for q > k+1."""
    if q <= k + 1:
        raise ValueError(f"the ball-growth trace comparison needs q > k+1, got {q}")
    if isinf(kappa):
        raise ValueError("kappa is infinite; run the necessity probe instead")
    lhs = lq_norm_radial(omega, u, q)
    base = kappa ** (1.0 / q) * energy(u, k) ** (1 / (k + 1))
    return _empirical("trace", lhs, base, constant, tolerance,
                      params={"n": u.n, "k": k, "q": q, "kappa": kappa,
                              "resolution": _resolution(u)},
                      witness=_witness(u))


def _fit_decay(radii, values) -> float:
    mask = np.asarray(values) > 0
    lr = np.log(np.asarray(radii)[mask])
    lv = np.log(np.asarray(values)[mask])
    return float(-np.polyfit(lr, lv, 1)[0])


def verify_wolff_sandwich(f: RadialDensity, k: int, radii=None,
                          fit_radii=None) -> SandwichReport:
    """Two-sided comparison of -u against the untruncated potential.

    u solves F_k[u] = f on all of R^n (n > 2k); the potential is
    evaluated on a log radius cloud spanning 0.01 to 100 support radii.
    ``c_lower``/``c_upper`` are the extreme ratios (-u)/W over the
    cloud; decay exponents are fitted far outside the support where both
    sides are clean power laws.
    """
    n = f.n
    u = radmod.solve_radial(f, k, domain="entire")
    mu = DiscreteMeasure.from_radial_density(f)
    params = PotentialParams.for_order(n, k)
    a = max(f.support_radius, 1e-12)
    if radii is None:
        radii = np.geomspace(0.01 * a, 100.0 * a, 28)
    radii = np.asarray(radii, dtype=np.float64)
    wvals = wolff_radial_profile(mu, radii, params)
    neg_u = np.interp(radii, u.r, -u.u)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(wvals > 0, neg_u / wvals, inf)
    c1, c2 = float(ratios.min()), float(ratios.max())
    if fit_radii is None:
        fit_radii = np.geomspace(100.0 * a, 1000.0 * a, 6)
    fit_radii = np.asarray(fit_radii, dtype=np.float64)
    decay_u = _fit_decay(fit_radii, np.interp(fit_radii, u.r, -u.u))
    decay_w = _fit_decay(fit_radii, wolff_radial_profile(mu, fit_radii, params))
    passed = bool(np.isfinite(ratios).all() and c1 > 0 and c2 < inf)
    return SandwichReport(
        name="wolff-sandwich", radii=radii.tolist(), ratios=ratios.tolist(),
        c_lower=c1, c_upper=c2, decay_u=decay_u, decay_w=decay_w, passed=passed,
        params={"n": n, "k": k, "target_decay": (n - 2 * k) / k,
                "support_radius": a},
        witness={"f": f.description or "anonymous", "samples": u.samples})


def verify_local_integral(u: RadialField, k: int,
                          constant: float | None = None,
                          tolerance: float = 1e-4,
                          inner_fraction: float = 0.9) -> InequalityReport:
    """(R^{2k-n} int_{B_{0.9R}} F_k[u])^{1/k} <= C R^{-n} int_{B_R} |u|.

    ``u`` is k-convex and nonpositive on the ball but need not vanish on
    the boundary (shifted solutions are typical inputs).
    """
    radmod._require_admissible(u, k)
    n, big_r = u.n, u.radius
    fk = radmod.radial_fk(u, k)
    cut = u.r <= inner_fraction * big_r
    inner = sphere_area(n) * float(simpson(fk[cut] * u.r[cut] ** (n - 1), x=u.r[cut]))
    lhs = (big_r ** (2 * k - n) * max(inner, 0.0)) ** (1.0 / k)
    base = big_r ** (-n) * sphere_area(n) * float(
        simpson(np.abs(u.u) * u.r ** (n - 1), x=u.r))
    return _empirical("local-integral", lhs, base, constant, tolerance,
                      params={"n": n, "k": k, "radius": big_r,
                              "resolution": _resolution(u)},
                      witness=_witness(u))
