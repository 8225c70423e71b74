"""Hourly labor cost of a stationary organization.

Permanent workers are paid w_j^0 e^{r s} after s years in level j, so the
permanent wage bill of a level is the integral of its stationary seniority
profile against that curve; it collapses to a closed form. Temporary
workers cost a flat premium wage w_j^t and carry no seniority. Floaters
are permanent generalists shared across business units, paid along their
own seniority curve and never promoted.

The closed form, an independent quadrature oracle for it, optimality
diagnostics for the one- and two-level relaxations of the cost program,
and the floater reduction that turns a mixed business-unit problem into
independent temporary-only problems all live here.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import quad

from .org import (
    FlexPlan,
    IllPosedError,
    LevelSpec,
    OrgSpec,
    min_permanent_share,
    promotion_demands,
    steady_promotable_pool,
)

__all__ = [
    "CostBreakdown",
    "BusinessUnitPlan",
    "FloaterReduction",
    "Case1Diagnostics",
    "GrowthExceedsAttritionError",
    "MissingFloaterCurveError",
    "ConstantWage",
    "ExponentialWage",
    "PiecewiseLinearWage",
    "level_cost",
    "cost_quadrature_oracle",
    "org_cost",
    "floater_average_cost",
    "business_unit_cost",
    "reduce_floaters",
    "case1_diagnostics",
    "case2_residuals",
    "write_cost_csv",
    "format_cost_table",
    "format_plan_table",
]


class GrowthExceedsAttritionError(ValueError):
    """Wage growth r >= mu_j: the level's wage bill diverges."""


class MissingFloaterCurveError(ValueError):
    """floater_wage is not set on the requested level."""


@dataclass
class CostBreakdown:
    """Per-level hourly cost split by worker type, in currency/hour."""

    permanent: np.ndarray
    temporary: np.ndarray
    floater: np.ndarray

    @property
    def per_level(self) -> np.ndarray:
        return self.permanent + self.temporary + self.floater

    @property
    def total(self) -> float:
        return float(np.sum(self.per_level))


def _check_growth(mu: float, r: float, level: int) -> None:
    if r >= mu:
        raise GrowthExceedsAttritionError(
            f"level {level}: wage growth {r} must stay below attrition {mu}"
        )


def _permanent_wage_bill(mu: float, tau: float, r: float, w0: float,
                         perm_mass: float, c_next: float) -> float:
    """Closed-form stationary wage bill of one level's permanent staff.

    With inflow G = mu * N p + C_next, the profile G e^{-mu s - B (s-tau)_+}
    integrated against w0 e^{rs} equals

        (w0 G / (mu - r)) * (1 - mu C_next e^{r tau} / D),
        D = (mu - r) G + r C_next e^{mu tau};

    for C_next = 0 the bracket is 1 and the bill is w0 mu N p / (mu - r).
    """
    inflow = mu * perm_mass + c_next
    if inflow <= 0.0:
        return 0.0
    denom = (mu - r) * inflow + r * c_next * math.exp(mu * tau)
    bracket = 1.0 - mu * c_next * math.exp(r * tau) / denom
    return w0 * inflow / (mu - r) * bracket


def _temporary_bill(spec: OrgSpec, plan: FlexPlan, j: int) -> float:
    # touch spec.wt only when temporaries are actually present
    if plan.p[j] >= 1.0:
        return 0.0
    return (1.0 - plan.p[j]) * spec.n[j] * spec.wt[j]


def level_cost(spec: OrgSpec, plan: FlexPlan, level: int) -> float:
    """Hourly cost of one level: temporary staff plus the permanent bill.

    Requires r < mu_j and, below the top level, a positive stationary
    promotable pool (the permanent profile must exist). Depends only on
    the plan entries at this level and above, never below.
    """
    j = level - 1
    if not 1 <= level <= spec.size:
        raise ValueError(f"level {level} outside 1..{spec.size}")
    _check_growth(spec.mu[j], spec.wage_growth, level)
    c = promotion_demands(spec, plan)
    if level < spec.size and c[j + 1] > 0.0:
        pool = steady_promotable_pool(spec, plan, level)
        if pool <= 0.0:
            raise IllPosedError([level], [pool])
    perm = _permanent_wage_bill(spec.mu[j], spec.tau[j], spec.wage_growth,
                                spec.w0[j], spec.n[j] * plan.p[j], c[j + 1])
    return _temporary_bill(spec, plan, j) + perm


def cost_quadrature_oracle(spec: OrgSpec, plan: FlexPlan, level: int) -> float:
    """Level cost by direct numerical integration of the wage integral.

    Deliberately avoids the closed form: builds the stationary profile,
    integrates it against w0 e^{rs} with composite Simpson split at the
    eligibility age, and adds the analytic exponential tail beyond the
    truncation point. Serves as an independent check of level_cost.
    """
    j = level - 1
    if not 1 <= level <= spec.size:
        raise ValueError(f"level {level} outside 1..{spec.size}")
    mu, tau, r, w0 = spec.mu[j], spec.tau[j], spec.wage_growth, spec.w0[j]
    _check_growth(mu, r, level)
    c = promotion_demands(spec, plan)
    perm_mass = spec.n[j] * plan.p[j]
    inflow = mu * perm_mass + c[j + 1]
    if inflow <= 0.0:
        return _temporary_bill(spec, plan, j)
    if level < spec.size and c[j + 1] > 0.0:
        pool = steady_promotable_pool(spec, plan, level)
        if pool <= 0.0:
            raise IllPosedError([level], [pool])
        extra_decay = c[j + 1] / pool
    else:
        extra_decay = 0.0

    def integrand(s: np.ndarray, shift: float) -> np.ndarray:
        return inflow * np.exp((r - mu) * s - extra_decay * (s - shift)) * w0

    total = 0.0
    if tau > 0.0:
        s_head = np.linspace(0.0, tau, 801)
        head = inflow * w0 * np.exp((r - mu) * s_head)
        total += _simpson(head, s_head)
    # beyond tau the decay rate is mu + B - r; cut where 40 e-foldings passed
    rate = mu + extra_decay - r
    s_cut = tau + 40.0 / rate
    s_tail = np.linspace(tau, s_cut, 4001)
    tail = inflow * w0 * np.exp((r - mu) * s_tail - extra_decay * (s_tail - tau))
    total += _simpson(tail, s_tail)
    total += tail[-1] / rate  # analytic remainder of the pure exponential
    return _temporary_bill(spec, plan, j) + total


def _simpson(values: np.ndarray, grid: np.ndarray) -> float:
    # composite Simpson on a uniform grid with an even interval count
    h = grid[1] - grid[0]
    return float(h / 3.0 * (values[0] + values[-1]
                            + 4.0 * np.sum(values[1:-1:2])
                            + 2.0 * np.sum(values[2:-1:2])))


def org_cost(spec: OrgSpec, plan: FlexPlan | None = None) -> CostBreakdown:
    """Hourly cost of the whole organization, split by worker type.

    Sum of level_cost over levels; fails with IllPosedError listing every
    level whose stationary pool is non-positive. Floater costs are zero
    here; they enter through business_unit_cost.
    """
    if plan is None:
        plan = FlexPlan.all_internal(spec.size)
    plan.check(spec)
    for j in range(spec.size):
        _check_growth(spec.mu[j], spec.wage_growth, j + 1)
    pools = steady_promotable_pool(spec, plan)
    c = promotion_demands(spec, plan)
    bad = [j for j in range(spec.size - 1)
           if pools[j] <= 0.0 and c[j + 1] > 0.0]
    if bad:
        raise IllPosedError([j + 1 for j in bad], [pools[j] for j in bad])
    perm = np.array([
        _permanent_wage_bill(spec.mu[j], spec.tau[j], spec.wage_growth,
                             spec.w0[j], spec.n[j] * plan.p[j], c[j + 1])
        for j in range(spec.size)
    ])
    temp = np.array([_temporary_bill(spec, plan, j) for j in range(spec.size)])
    return CostBreakdown(permanent=perm, temporary=temp,
                         floater=np.zeros(spec.size))


# ---------------------------------------------------------------------------
# floater wage curves


@dataclass
class ConstantWage:
    """Flat floater wage, currency per hour."""

    value: float

    def __call__(self, s: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(s, dtype=float), self.value)


@dataclass
class ExponentialWage:
    """Floater wage base * e^{growth * s}; growth must stay below attrition."""

    base: float
    growth: float

    def __call__(self, s: np.ndarray) -> np.ndarray:
        return self.base * np.exp(self.growth * np.asarray(s, dtype=float))


@dataclass
class PiecewiseLinearWage:
    """Linear interpolation through (seniority, wage) knots.

    Beyond the last knot the wage is held at its final value; before the
    first knot it is held at the initial value.
    """

    knots: Sequence[float]
    values: Sequence[float]

    def __post_init__(self):
        self.knots = np.asarray(self.knots, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.knots.size != self.values.size or self.knots.size < 2:
            raise ValueError("need matching knot and value arrays, length >= 2")
        if np.any(np.diff(self.knots) <= 0):
            raise ValueError("knots must be strictly increasing")

    def __call__(self, s: np.ndarray) -> np.ndarray:
        return np.interp(np.asarray(s, dtype=float), self.knots, self.values)


def floater_average_cost(spec: OrgSpec, level: int) -> float:
    """Seniority-discounted floater wage integral w^{fa} of one level.

    Computes int_0^inf w^{float}(s) e^{-mu_j s} ds by adaptive quadrature,
    splitting at any curve knots so kinks never straddle a panel. Note the
    integral is taken exactly in this unnormalized form, so its value
    carries a factor 1/mu_j relative to a per-head average wage.
    """
    j = level - 1
    if not 1 <= level <= spec.size:
        raise ValueError(f"level {level} outside 1..{spec.size}")
    curve = spec.levels[j].floater_wage
    if curve is None:
        raise MissingFloaterCurveError(f"level {level} has no floater wage curve")
    mu = spec.mu[j]
    if isinstance(curve, ExponentialWage):
        if curve.growth >= mu:
            raise GrowthExceedsAttritionError(
                f"level {level}: floater wage growth {curve.growth} must "
                f"stay below attrition {mu}"
            )
        # exact, and safe from overflow where quadrature would probe the
        # far tail of the unbounded integrand
        return curve.base / (mu - curve.growth)
    if isinstance(curve, ConstantWage):
        return curve.value / mu

    def f(s: float) -> float:
        return float(curve(np.asarray(s, dtype=float))) * math.exp(-mu * s)

    knots = np.asarray(getattr(curve, "knots", ()), dtype=float)
    if knots.size:
        split = float(knots[-1])
        head, _ = quad(f, 0.0, split, points=list(knots), limit=200)
        tail, _ = quad(f, split, np.inf)
        return head + tail
    value, _ = quad(f, 0.0, np.inf)
    return value


# ---------------------------------------------------------------------------
# business units and floaters


@dataclass
class BusinessUnitPlan:
    """Staffing mix of K business units sharing one level structure.

    headcounts       (K, L) per-unit headcounts N_j^k, summing over units
                     to the organization's level headcounts
    permanent_share  (K, L) p_j^k
    floater_share    (K, L) g_j^k, with p + g <= 1 pointwise; the
                     remainder 1 - p - g is temporary
    temp_wage        optional (K, L) per-unit temporary wages; defaults to
                     the organization's per-level temp wages
    floater_avg_cost optional (L,) seniority-discounted floater wage; when
                     absent it is computed from the levels' wage curves

    Promotions happen within a unit, so each unit behaves as an
    independent organization with a pure-internal hiring plan.
    """

    headcounts: np.ndarray
    permanent_share: np.ndarray
    floater_share: np.ndarray
    temp_wage: np.ndarray | None = None
    floater_avg_cost: np.ndarray | None = None

    def __post_init__(self):
        self.headcounts = np.atleast_2d(np.asarray(self.headcounts, dtype=float))
        self.permanent_share = np.atleast_2d(
            np.asarray(self.permanent_share, dtype=float))
        self.floater_share = np.atleast_2d(
            np.asarray(self.floater_share, dtype=float))
        if self.temp_wage is not None:
            self.temp_wage = np.atleast_2d(np.asarray(self.temp_wage, dtype=float))
        if self.floater_avg_cost is not None:
            self.floater_avg_cost = np.asarray(self.floater_avg_cost, dtype=float)

    @property
    def units(self) -> int:
        return self.headcounts.shape[0]

    def check(self, spec: OrgSpec) -> "BusinessUnitPlan":
        shape = (self.units, spec.size)
        for name, arr in (("headcounts", self.headcounts),
                          ("permanent_share", self.permanent_share),
                          ("floater_share", self.floater_share)):
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
        if self.temp_wage is not None and self.temp_wage.shape != shape:
            raise ValueError(f"temp_wage must have shape {shape}")
        if np.any(self.headcounts < 0):
            raise ValueError("unit headcounts must be nonnegative")
        if not np.allclose(self.headcounts.sum(axis=0), spec.n, rtol=1e-9):
            raise ValueError("unit headcounts do not sum to the level headcounts")
        bad = (self.permanent_share < 0) | (self.floater_share < 0) \
            | (self.permanent_share + self.floater_share > 1.0 + 1e-12)
        if np.any(bad):
            raise ValueError("need 0 <= p, 0 <= g, p + g <= 1 in every cell")
        return self

    def resolved_temp_wage(self, spec: OrgSpec) -> np.ndarray:
        if self.temp_wage is not None:
            return self.temp_wage
        return np.broadcast_to(spec.wt, (self.units, spec.size)).copy()

    def resolved_floater_cost(self, spec: OrgSpec) -> np.ndarray:
        if self.floater_avg_cost is not None:
            return self.floater_avg_cost
        return np.array([floater_average_cost(spec, j + 1)
                         for j in range(spec.size)])


def _unit_spec(spec: OrgSpec, headrow: np.ndarray) -> OrgSpec:
    levels = [
        LevelSpec(headcount=float(headrow[j]), attrition=lv.attrition,
                  eligibility_age=lv.eligibility_age, base_wage=lv.base_wage,
                  temp_wage=lv.temp_wage, floater_wage=lv.floater_wage)
        for j, lv in enumerate(spec.levels)
    ]
    return OrgSpec(levels=levels, wage_growth=spec.wage_growth)


def business_unit_cost(spec: OrgSpec, bu_plan: BusinessUnitPlan) -> CostBreakdown:
    """Hourly cost of a K-unit organization with floaters.

    Per unit and level: temporary staff at the unit's temp wage, floaters
    at the level's seniority-discounted wage integral, and the permanent
    wage bill of the unit's own stationary profile (units promote
    internally, so each is costed as an independent organization whose
    permanent mass is N_j^k p_j^k).
    """
    bu_plan.check(spec)
    wt = bu_plan.resolved_temp_wage(spec)
    # wage curves are only needed where floaters are actually deployed
    wfa = (bu_plan.resolved_floater_cost(spec)
           if np.any(bu_plan.floater_share > 0.0) else np.zeros(spec.size))
    perm = np.zeros(spec.size)
    temp = np.zeros(spec.size)
    flt = np.zeros(spec.size)
    for k in range(bu_plan.units):
        unit = _unit_spec(spec, bu_plan.headcounts[k])
        plan = FlexPlan(alpha=np.ones(spec.size - 1), p=bu_plan.permanent_share[k])
        c = promotion_demands(unit, plan)
        pools = steady_promotable_pool(unit, plan)
        bad = [j for j in range(spec.size - 1)
               if pools[j] <= 0.0 and c[j + 1] > 0.0]
        if bad:
            raise IllPosedError([j + 1 for j in bad], [pools[j] for j in bad])
        for j in range(spec.size):
            perm[j] += _permanent_wage_bill(
                unit.mu[j], unit.tau[j], unit.wage_growth, unit.w0[j],
                unit.n[j] * plan.p[j], c[j + 1])
            share_t = 1.0 - bu_plan.permanent_share[k, j] - bu_plan.floater_share[k, j]
            temp[j] += unit.n[j] * max(share_t, 0.0) * wt[k, j]
            flt[j] += unit.n[j] * bu_plan.floater_share[k, j] * wfa[j]
    return CostBreakdown(permanent=perm, temporary=temp, floater=flt)


@dataclass
class FloaterReduction:
    """Outcome of minimizing over floater shares for fixed permanent shares.

    The flexible part of each (unit, level) cell goes entirely to whichever
    of the temporary wage and the discounted floater wage is cheaper, so
    the mixed problem collapses to independent temporary-only unit
    problems priced at the effective wage min(w^t, w^{fa}).
    """

    unit_specs: list[OrgSpec]
    unit_plans: list[FlexPlan]
    effective_temp_wage: np.ndarray
    floater_share: np.ndarray

    def total_cost(self) -> float:
        total = 0.0
        for k, (unit, plan) in enumerate(zip(self.unit_specs, self.unit_plans)):
            c = promotion_demands(unit, plan)
            for j in range(unit.size):
                total += _permanent_wage_bill(
                    unit.mu[j], unit.tau[j], unit.wage_growth, unit.w0[j],
                    unit.n[j] * plan.p[j], c[j + 1])
                total += (unit.n[j] * (1.0 - plan.p[j])
                          * self.effective_temp_wage[k, j])
        return total


def reduce_floaters(spec: OrgSpec, bu_plan: BusinessUnitPlan) -> FloaterReduction:
    """Collapse floater shares to their per-cell optimum.

    For fixed permanent shares the cost is linear in each floater share
    g_j^k on [0, 1 - p_j^k], so the optimum sits at an endpoint: all
    flexible staff become floaters where the discounted floater wage
    undercuts the temporary wage, and none otherwise. Returns the
    equivalent temporary-only problems, one per unit.
    """
    bu_plan.check(spec)
    wt = bu_plan.resolved_temp_wage(spec)
    wfa = bu_plan.resolved_floater_cost(spec)
    effective = np.minimum(wt, wfa[np.newaxis, :])
    flexible = 1.0 - bu_plan.permanent_share
    g_opt = np.where(wfa[np.newaxis, :] < wt, flexible, 0.0)
    unit_specs = []
    unit_plans = []
    for k in range(bu_plan.units):
        unit = _unit_spec(spec, bu_plan.headcounts[k])
        for j, lv in enumerate(unit.levels):
            lv.temp_wage = float(effective[k, j])
        unit_specs.append(unit)
        unit_plans.append(FlexPlan(alpha=np.ones(spec.size - 1),
                                   p=bu_plan.permanent_share[k].copy()))
    return FloaterReduction(unit_specs=unit_specs, unit_plans=unit_plans,
                            effective_temp_wage=effective, floater_share=g_opt)


# ---------------------------------------------------------------------------
# optimality diagnostics for the one- and two-level relaxations


@dataclass
class Case1Diagnostics:
    """Optimality picture when only the bottom level uses temporaries.

    first_derivative / second_derivative are d Cost_1 / d p_1 and its
    second derivative at the plan's p_1. p_opt is the exact minimizer of
    Cost_1 over [p_min, 1] and regime classifies it: "min-share" when the
    temporary wage is low enough to pin p_1 at its feasibility floor,
    "all-permanent" when it is too high to ever pay off, and "interior"
    between the two.
    """

    first_derivative: float
    second_derivative: float
    p_opt: float
    regime: str
    p_min: float


def _case1_pieces(spec: OrgSpec, plan: FlexPlan):
    mu, tau, r = spec.mu[0], spec.tau[0], spec.wage_growth
    n1, w0 = spec.n[0], spec.w0[0]
    c = promotion_demands(spec, plan)
    c2 = c[1]
    # alpha_1 C_1 = mu_1 N_1 p_1 + C_2 regardless of the level-1 convention
    inflow = mu * n1 * plan.p[0] + c2
    denom = (mu - r) * inflow + r * c2 * math.exp(mu * tau)
    return mu, tau, r, n1, w0, c2, inflow, denom


def case1_diagnostics(spec: OrgSpec, plan: FlexPlan) -> Case1Diagnostics:
    """Derivatives and the exact minimizer of Cost_1 in the one-level case.

    Requires p_2..p_L = 1. The first derivative is

        N_1 (-w^t + (w0 mu / (mu - r)) (1 - r mu C_2^2 e^{(r+mu) tau} / D^2)),
        D = (mu - r)(mu N_1 p_1 + C_2) + r C_2 e^{mu tau},

    strictly increasing in p_1, so Cost_1 is strictly convex and the root
    of the derivative (clamped to [p_min, 1]) is the unique minimizer;
    it is solved in closed form by inverting D at the critical value.
    """
    plan.check(spec)
    if spec.size > 1 and not np.all(plan.p[1:] == 1.0):
        raise ValueError("one-level diagnostics need p_2..p_L = 1")
    _check_growth(spec.mu[0], spec.wage_growth, 1)
    mu, tau, r, n1, w0, c2, inflow, denom = _case1_pieces(spec, plan)
    wt1 = spec.wt[0]
    boost = math.exp((r + mu) * tau)
    first = n1 * (-wt1 + w0 * mu / (mu - r)
                  * (1.0 - r * mu * c2 * c2 * boost / denom ** 2))
    second = 2.0 * n1 * w0 * r * mu * mu * c2 * c2 * boost / denom ** 3
    p_min = min_permanent_share(spec, plan, 1) if spec.size > 1 else 0.0

    def slack(p1: float) -> float:
        # r mu C2^2 e^{(r+mu)tau} / D(p1)^2, decreasing in p1
        d = (mu - r) * (mu * n1 * p1 + c2) + r * c2 * math.exp(mu * tau)
        return r * mu * c2 * c2 * boost / d ** 2

    critical = 1.0 - (mu - r) * wt1 / (w0 * mu)
    if c2 == 0.0 or r == 0.0:
        # derivative is constant in p_1: sign decides an endpoint optimum
        p_opt, regime = ((p_min, "min-share") if critical > 0.0
                         else (1.0, "all-permanent"))
    elif critical >= slack(p_min):
        p_opt, regime = p_min, "min-share"
    elif critical <= slack(1.0):
        p_opt, regime = 1.0, "all-permanent"
    else:
        d_star = math.sqrt(r * mu * c2 * c2 * boost / critical)
        p_opt = ((d_star - r * c2 * math.exp(mu * tau)) / (mu - r) - c2) / (mu * n1)
        regime = "interior"
    return Case1Diagnostics(first_derivative=first, second_derivative=second,
                            p_opt=p_opt, regime=regime, p_min=p_min)


def case2_residuals(spec: OrgSpec, plan: FlexPlan) -> tuple[float, float]:
    """Stationarity residuals when the two bottom levels use temporaries.

    Requires p_3..p_L = 1. Returns the two first-order conditions in
    (p_1, p_2) as relative residuals (lhs - rhs) / max(|lhs|, |rhs|); both
    vanish exactly at a critical point of the total cost. The second
    relation assumes the hiring ratio at level 2 is held at 1 while p_2
    varies; with larger ratios it is a fixed-flux variant of the true
    stationarity condition.
    """
    plan.check(spec)
    if spec.size < 2:
        raise ValueError("two-level diagnostics need at least two levels")
    if spec.size > 2 and not np.all(plan.p[2:] == 1.0):
        raise ValueError("two-level diagnostics need p_3..p_L = 1")
    for j in (0, 1):
        _check_growth(spec.mu[j], spec.wage_growth, j + 1)
    mu, tau, r, n1, w0, c2, inflow1, denom1 = _case1_pieces(spec, plan)
    boost1 = math.exp((r + mu) * tau)
    lhs1 = (mu - r) * n1 * spec.wt[0]
    rhs1 = w0 * mu * n1 * (1.0 - r * mu * c2 * c2 * boost1 / denom1 ** 2)
    r1 = (lhs1 - rhs1) / max(abs(lhs1), abs(rhs1))

    if inflow1 <= 0.0:
        raise ValueError("two-level diagnostics need permanent staff at level 1")
    mu2, tau2 = spec.mu[1], spec.tau[1]
    n2, w02 = spec.n[1], spec.w0[1]
    alpha2 = plan.alpha_full[1]
    c = promotion_demands(spec, plan)
    c3 = c[2]
    level1 = (w0 / (mu - r)) * (
        -mu * inflow1 * math.exp(r * tau) / denom1
        + inflow1 * mu * c2 * math.exp(r * tau) * r * math.exp(mu * tau)
        / denom1 ** 2
    )
    if c3 > 0.0:
        denom2 = (mu2 - r) * alpha2 * c[1] + r * c3 * math.exp(mu2 * tau2)
        bracket2 = (1.0 - mu2 * c3 * math.exp(r * tau2) / denom2
                    + alpha2 * c[1] * (mu2 - r) * mu2 * c3 * math.exp(r * tau2)
                    / denom2 ** 2)
    else:
        # no demand from above the second level: only the direct wage term
        bracket2 = 1.0
    level2 = w02 / (mu2 - r) * bracket2
    lhs2 = n2 * spec.wt[1]
    rhs2 = mu2 * n2 * (spec.wt[0] / mu + level1 + level2)
    r2 = (lhs2 - rhs2) / max(abs(lhs2), abs(rhs2))
    return r1, r2


# ---------------------------------------------------------------------------
# export


def write_cost_csv(path: str, breakdown: CostBreakdown,
                   header_lines: Sequence[str] = ()) -> None:
    """Write per-level costs as CSV columns level, permanent, temporary,
    floater, total, with a final total row."""
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["level", "permanent", "temporary", "floater", "total"])
        per = breakdown.per_level
        for j in range(per.size):
            writer.writerow([j + 1,
                             f"{breakdown.permanent[j]:.6f}",
                             f"{breakdown.temporary[j]:.6f}",
                             f"{breakdown.floater[j]:.6f}",
                             f"{per[j]:.6f}"])
        writer.writerow(["total", "", "", "", f"{breakdown.total:.6f}"])


def format_cost_table(breakdown: CostBreakdown) -> str:
    """Plain-text per-level cost table."""
    rows = ["level  permanent      temporary      floater        total"]
    per = breakdown.per_level
    for j in range(per.size):
        rows.append(f"{j + 1:>5}  {breakdown.permanent[j]:>13.2f}  "
                    f"{breakdown.temporary[j]:>13.2f}  "
                    f"{breakdown.floater[j]:>13.2f}  {per[j]:>13.2f}")
    rows.append(f"total  {'':13}  {'':13}  {'':13}  {breakdown.total:>13.2f}")
    return "\n".join(rows)


def format_plan_table(entries: Sequence[tuple[str, FlexPlan, float]]) -> str:
    """Plain-text table of staffing plans and their total hourly costs.

    One block per entry: a row of hiring ratios (level 1 has none) and a
    row of permanent shares across levels, then the cost in M currency/h.
    """
    lines = []
    for label, plan, total in entries:
        levels = plan.p.size
        head = "level".ljust(14) + "".join(f"{j:>9}" for j in range(1, levels + 1))
        alpha = ["        -"] + [f"{a:>9.2f}" for a in plan.alpha]
        lines.append(f"{label}")
        lines.append(head)
        lines.append("alpha".ljust(14) + "".join(alpha))
        lines.append("perm share".ljust(14)
                     + "".join(f"{p:>9.2f}" for p in plan.p))
        lines.append(f"total cost    {total / 1e6:.4f} M/h")
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"
