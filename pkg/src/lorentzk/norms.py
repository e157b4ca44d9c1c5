"""Classical Lorentz functionals of step functions.

Three flavors over a weight w and exponent p:

* lambda:  || f* w^{1/p} ||_{L^p}           (exact cell sums)
* gamma:   || f** w^{1/p} ||_{L^p}          (adaptive quadrature + exact tails)
* s:       || (f** - f*) w^{1/p} ||_{L^p}   (exact cell sums via tail moments)

where f* is the non-increasing rearrangement and f** its running integral
mean.  On the cell (x_{i-1}, x_i] of a non-increasing step function the
oscillation is exactly (A_{i-1} - v_i x_{i-1}) / t with A_{i-1} the prefix
integral, so the s-flavor integrand is c^p t^{-p} w(t) per cell and every
piece reduces to a weight moment; beyond the support f* vanishes and both
gamma- and s-integrands equal (M/t)^p w(t) with M the total mass.  Divergent
integrals yield +inf with a flag rather than an error.  p = inf flavors are
grid suprema over breakpoints plus refinement points (grid-level accuracy).

All entry points rearrange their argument first, so the functionals are
rearrangement-invariant by construction.
"""

import math
from dataclasses import dataclass
from typing import Literal

from scipy.integrate import quad

from .stepfn import StepFunction, maximal, osc_transform, rearrange
from .weights import QUAD_REL_TOL, Weight, check_rbp, reciprocal_weight

__all__ = [
    "LorentzSpace",
    "TruncatedNorm",
    "NormResult",
    "norm",
    "norm_result",
    "truncated_norm",
    "truncated_norm_result",
    "s_lambda_identity_check",
    "gamma_equals_s_check",
]

Flavor = Literal["lambda", "gamma", "s"]
_FLAVORS = ("lambda", "gamma", "s")


@dataclass(frozen=True)
class LorentzSpace:
    """Space descriptor: flavor in {lambda, gamma, s}, exponent p, weight w."""

    flavor: str
    p: float
    w: Weight

    def __post_init__(self) -> None:
        if self.flavor not in _FLAVORS:
            raise ValueError(f"flavor must be one of {_FLAVORS}, got {self.flavor!r}")
        if not (self.p > 0.0):
            raise ValueError("exponent p must be positive (math.inf allowed)")

    def to_json_dict(self) -> dict:
        return {
            "flavor": self.flavor,
            "p": self.p if math.isfinite(self.p) else "inf",
            "w": self.w.to_json_dict(),
        }


@dataclass(frozen=True)
class TruncatedNorm:
    """A norm restricted to the window (0, t) ("head") or (t, inf) ("tail")."""

    space: LorentzSpace
    window: Literal["head", "tail"]
    t: float

    def __post_init__(self) -> None:
        if self.window not in ("head", "tail"):
            raise ValueError("window must be 'head' or 'tail'")
        if not (self.t > 0.0 and math.isfinite(self.t)):
            raise ValueError("window edge t must be positive and finite")


@dataclass(frozen=True)
class NormResult:
    value: float
    diverged: bool
    flags: tuple[str, ...] = ()


def _powered_lambda(fstar: StepFunction, p: float, w: Weight, lo: float, hi: float) -> float:
    """integral over (lo, hi) of (f*)^p w, exact."""
    total = 0.0
    for a, b, v in fstar.cells():
        if v == 0.0:
            continue
        l, h = max(a, lo), min(b, hi)
        if l < h:
            piece = w.moment(0.0, l, h)
            if math.isinf(piece):
                return math.inf
            total += (v ** p) * piece
    return total


def _osc_cell_constants(fstar: StepFunction) -> list[float]:
    """c_i = A_{i-1} - v_i x_{i-1} per cell: the scaled oscillation constants."""
    prefix = fstar._prefix
    out = []
    for i, (a, _b, v) in enumerate(fstar.cells()):
        out.append(prefix[i] - v * a)
    return out


def _powered_s(fstar: StepFunction, p: float, w: Weight, lo: float, hi: float) -> float:
    """integral over (lo, hi) of (f** - f*)^p w, exact via tail moments."""
    total = 0.0
    consts = _osc_cell_constants(fstar)
    for (a, b, _v), c in zip(fstar.cells(), consts):
        l, h = max(a, lo), min(b, hi)
        if l < h and c > 0.0:
            piece = w.moment(-p, l, h)
            if math.isinf(piece):
                return math.inf
            total += (c ** p) * piece
    m = fstar.total_integral
    end = fstar.support_end
    l = max(end, lo)
    if m > 0.0 and l < hi:
        piece = w.moment(-p, l, hi)
        if math.isinf(piece):
            return math.inf
        total += (m ** p) * piece
    return total


def _powered_gamma(
    fstar: StepFunction, p: float, w: Weight, lo: float, hi: float, rel_tol: float
) -> float:
    """integral over (lo, hi) of (f**)^p w: quadrature per cell, exact tail."""
    if fstar.is_zero:
        return 0.0
    mean = maximal(fstar)
    total = 0.0
    first = True
    for a, b, v in fstar.cells():
        l, h = max(a, lo), min(b, hi)
        if l >= h:
            first = False
            continue
        if first and l <= 0.0:
            # on the first cell the running mean equals the value
            piece = w.moment(0.0, l, h)
            if math.isinf(piece):
                return math.inf
            total += (v ** p) * piece
        else:
            val, _err = quad(
                lambda s: mean(s) ** p * w(s), l, h, epsrel=rel_tol, epsabs=0.0, limit=200
            )
            total += val
        first = False
    m = fstar.total_integral
    end = fstar.support_end
    l = max(end, lo)
    if m > 0.0 and l < hi:
        piece = w.moment(-p, l, hi)
        if math.isinf(piece):
            return math.inf
        total += (m ** p) * piece
    return total


def _sup_samples(fstar: StepFunction, lo: float, hi: float) -> list[float]:
    """Breakpoints plus geometric refinement points inside (lo, hi)."""
    if fstar.is_zero:
        return []
    hi_eff = hi if math.isfinite(hi) else max(fstar.support_end, lo) * 1e3
    lo_eff = lo if lo > 0.0 else min(fstar.first_breakpoint, hi_eff) * 1e-3
    if lo_eff >= hi_eff:
        lo_eff = hi_eff * 1e-6
    knots = sorted({lo_eff, hi_eff} | {x for x in fstar.breakpoints if lo_eff < x < hi_eff})
    pts: set[float] = set()
    for a, b in zip(knots, knots[1:]):
        for i in range(10):
            pts.add(a * (b / a) ** (i / 9.0))
    pts.add(hi_eff)
    return sorted(pts)


def _sup_norm(fstar: StepFunction, flavor: str, w: Weight, lo: float, hi: float) -> float:
    if fstar.is_zero:
        return 0.0
    mean = maximal(fstar)
    best = 0.0
    for t in _sup_samples(fstar, lo, hi):
        if flavor == "lambda":
            g = fstar(t)
        elif flavor == "gamma":
            g = mean(t)
        else:
            g = mean(t) - fstar(t)
        best = max(best, g * w(t))
    return best


def _powered(space: LorentzSpace, fstar: StepFunction, lo: float, hi: float, rel_tol: float) -> float:
    if space.flavor == "lambda":
        return _powered_lambda(fstar, space.p, space.w, lo, hi)
    if space.flavor == "s":
        return _powered_s(fstar, space.p, space.w, lo, hi)
    return _powered_gamma(fstar, space.p, space.w, lo, hi, rel_tol)


def norm_result(space: LorentzSpace, f: StepFunction, rel_tol: float = QUAD_REL_TOL) -> NormResult:
    """Norm of f in the space; divergent integrals give +inf with a flag."""
    fstar = rearrange(f)
    # s-flavor membership requires f* -> 0 at infinity: automatic for
    # compactly supported step functions
    if not math.isfinite(space.p):
        value = _sup_norm(fstar, space.flavor, space.w, 0.0, math.inf)
        return NormResult(value, False, ("grid-supremum",))
    powered = _powered(space, fstar, 0.0, math.inf, rel_tol)
    if math.isinf(powered):
        return NormResult(math.inf, True, ("divergent-integral",))
    return NormResult(powered ** (1.0 / space.p), False)


def norm(space: LorentzSpace, f: StepFunction, rel_tol: float = QUAD_REL_TOL) -> float:
    return norm_result(space, f, rel_tol).value


def truncated_norm_result(
    tn: TruncatedNorm, fstar: StepFunction, rel_tol: float = QUAD_REL_TOL
) -> NormResult:
    """Windowed norm of a non-increasing function (no rearrangement applied).

    The window restricts the integration range, not the function: the
    oscillation and running mean keep their global prefix integrals.
    """
    if not fstar.is_zero and not fstar.is_nonincreasing():
        raise ValueError("truncated norms are defined for non-increasing step functions")
    lo, hi = (0.0, tn.t) if tn.window == "head" else (tn.t, math.inf)
    if not math.isfinite(tn.space.p):
        value = _sup_norm(fstar, tn.space.flavor, tn.space.w, lo, hi)
        return NormResult(value, False, ("grid-supremum",))
    powered = _powered(tn.space, fstar, lo, hi, rel_tol)
    if math.isinf(powered):
        return NormResult(math.inf, True, ("divergent-integral",))
    return NormResult(powered ** (1.0 / tn.space.p), False)


def truncated_norm(tn: TruncatedNorm, fstar: StepFunction, rel_tol: float = QUAD_REL_TOL) -> float:
    return truncated_norm_result(tn, fstar, rel_tol).value


def s_lambda_identity_check(
    f: StepFunction, p: float, w: Weight, t: float = math.inf
) -> tuple[float, float]:
    """Both sides of the window identity linking the s-flavor to the transform.

    Left: (integral_0^t (f**-f*)^p w)^{1/p} by the exact s-flavor cell sums.
    Right: (integral_{1/t}^inf (Tf*)^p w~)^{1/p} with w~ the reciprocal
    weight, by adaptive quadrature of the pointwise transform (independent
    route).  t = inf gives the full-norm identity (right side from 0).
    """
    if not (p > 0.0 and math.isfinite(p)):
        raise ValueError("exponent p must be positive and finite")
    fstar = rearrange(f)
    left_pow = _powered_s(fstar, p, w, 0.0, t)
    left = math.inf if math.isinf(left_pow) else left_pow ** (1.0 / p)
    if fstar.is_zero:
        return left, 0.0
    transform = osc_transform(fstar)
    wr = reciprocal_weight(w, p)
    lo = 0.0 if math.isinf(t) else 1.0 / t
    hi = 1.0 / fstar.first_breakpoint  # the transform vanishes beyond this point
    if lo >= hi:
        return left, 0.0
    interior = [1.0 / x for x in fstar.breakpoints if lo < 1.0 / x < hi]
    val, _err = quad(
        lambda s: transform(s) ** p * wr(s),
        lo,
        hi,
        points=sorted(interior) if interior else None,
        epsrel=QUAD_REL_TOL,
        epsabs=0.0,
        limit=300,
    )
    right = val ** (1.0 / p)
    return left, right


def gamma_equals_s_check(f: StepFunction, p: float, w: Weight) -> tuple[float, float]:
    """(gamma-norm^p, s-norm^p) of f; requires the reverse balance condition.

    The reverse B_p condition is what makes the two flavors equivalent; when
    it fails the comparison is meaningless and this raises instead.
    """
    if not (p > 0.0 and math.isfinite(p)):
        raise ValueError("exponent p must be positive and finite")
    verdict = check_rbp(w, p)
    if not verdict.holds:
        raise ValueError(
            "reverse B_p condition fails for this weight/exponent; "
            "gamma- and s-flavors are not comparable"
        )
    fstar = rearrange(f)
    return (
        _powered_gamma(fstar, p, w, 0.0, math.inf, QUAD_REL_TOL),
        _powered_s(fstar, p, w, 0.0, math.inf),
    )
