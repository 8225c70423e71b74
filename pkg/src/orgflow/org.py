"""Seniority-structured workforce hierarchy: domain types and closed-form analytics.

An organization is a ladder of L job levels. Level j holds a constant
headcount N_j spread over seniority s (years spent in the level). Workers
leave at an attrition rate mu_j, become promotable once s >= tau_j, and are
promoted into level j+1 at a per-year rate P_j applied to the promotable
pool A_j = integral of the density beyond tau_j. Vacancies are filled by a
mix of internal promotion and external hiring: alpha_j >= 1 is the ratio of
total inflow at level j to its internal-promotion part (alpha_j = 1 means
promotion only; level 1 is always hired externally), and p_j in [0, 1] is
the share of level j staffed with permanent workers, the remainder being
temporary workers who sit outside the seniority dynamics.

Everything here is closed form: cumulative promotion fluxes, stationary
seniority profiles and the promotable pools they imply, and the feasibility
bounds (minimal permanent shares, minimal external hiring ratios) that keep
those pools positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "LevelSpec",
    "OrgSpec",
    "FlexPlan",
    "SteadyState",
    "InitialConditionReport",
    "OrgValidationError",
    "IllPosedError",
    "MassMismatchError",
    "MissingWageError",
    "validate",
    "cumulative_attrition",
    "promotion_demands",
    "promotion_demand",
    "steady_promotable_pool",
    "min_permanent_share",
    "min_external_ratios",
    "stationary_state",
    "check_initial_condition",
    "FEASIBILITY_MARGIN",
]

# Relative pool margin used when inverting feasibility bounds: a pool is
# treated as safely positive only when A_j >= FEASIBILITY_MARGIN * N_j.
FEASIBILITY_MARGIN = 1e-6


class OrgValidationError(ValueError):
    """Aggregated structural problems in an organization description."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class IllPosedError(ValueError):
    """A stationary profile would need a non-positive promotable pool."""

    def __init__(self, levels: list[int], pools: list[float]):
        self.levels = list(levels)
        self.pools = list(pools)
        detail = ", ".join(
            f"level {j}: pool {a:.6g}" for j, a in zip(self.levels, self.pools)
        )
        super().__init__(
            "no stationary profile with positive promotable pools; "
            "raise external hiring or permanent shares (" + detail + ")"
        )


class MassMismatchError(ValueError):
    """Initial densities do not integrate to the permanent headcounts."""


class MissingWageError(ValueError):
    """A wage field needed by the requested computation is not set."""


@dataclass
class LevelSpec:
    """One hierarchy level.

    headcount       total staff N_j held constant over time
    attrition       departure rate mu_j per year
    eligibility_age seniority tau_j (years) before promotion is possible
    base_wage       entry wage of a permanent worker, currency per hour
    temp_wage       hourly cost of a temporary worker at this level
    floater_wage    optional wage curve s -> currency/hour for floaters
    """

    headcount: float
    attrition: float
    eligibility_age: float = 0.0
    base_wage: float | None = None
    temp_wage: float | None = None
    floater_wage: Callable[[np.ndarray], np.ndarray] | None = None


@dataclass
class OrgSpec:
    """An L-level organization plus economy-wide parameters.

    wage_growth is the exponential seniority premium r: a permanent worker
    hired at wage w0 costs w0 * exp(r * s) after s years in the level. It
    must stay below every attrition rate for wage bills to converge.
    business_units optionally splits each level's headcount across K units
    (a K x L array of headcounts summing per level to N_j).
    """

    levels: list[LevelSpec]
    wage_growth: float = 0.0
    business_units: np.ndarray | None = None

    @property
    def size(self) -> int:
        return len(self.levels)

    @cached_property
    def n(self) -> np.ndarray:
        return np.array([lv.headcount for lv in self.levels], dtype=float)

    @cached_property
    def mu(self) -> np.ndarray:
        return np.array([lv.attrition for lv in self.levels], dtype=float)

    @cached_property
    def tau(self) -> np.ndarray:
        return np.array([lv.eligibility_age for lv in self.levels], dtype=float)

    @cached_property
    def w0(self) -> np.ndarray:
        wages = [lv.base_wage for lv in self.levels]
        if any(w is None for w in wages):
            raise MissingWageError("base_wage is not set on every level")
        return np.array(wages, dtype=float)

    @cached_property
    def wt(self) -> np.ndarray:
        wages = [lv.temp_wage for lv in self.levels]
        if any(w is None for w in wages):
            raise MissingWageError("temp_wage is not set on every level")
        return np.array(wages, dtype=float)


@dataclass
class FlexPlan:
    """Staffing flexibility choices: hiring ratios and permanent shares.

    alpha holds the external-hiring ratios alpha_2..alpha_L (level 1 has no
    internal inflow, so it carries no ratio). p holds the permanent shares
    p_1..p_L. The all-internal plan is alpha = 1, p = 1 everywhere.
    """

    alpha: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        self.alpha = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        self.p = np.atleast_1d(np.asarray(self.p, dtype=float))

    @classmethod
    def all_internal(cls, size: int) -> "FlexPlan":
        return cls(alpha=np.ones(max(size - 1, 0)), p=np.ones(size))

    @property
    def alpha_full(self) -> np.ndarray:
        """Ratios padded with the level-1 convention alpha_1 = 1.

        Level 1 has no promotions feeding it, so its ratio never enters any
        balance; with the padding, alpha_j * C_j = mu_j N_j p_j + C_{j+1}
        holds uniformly for j = 1..L.
        """
        return np.concatenate(([1.0], self.alpha))

    def check(self, spec: OrgSpec) -> "FlexPlan":
        if self.p.shape != (spec.size,):
            raise ValueError(
                f"plan has {self.p.size} permanent shares for {spec.size} levels"
            )
        if self.alpha.shape != (max(spec.size - 1, 0),):
            raise ValueError(
                f"plan has {self.alpha.size} hiring ratios, expected {spec.size - 1}"
            )
        if np.any(self.alpha < 1.0):
            raise ValueError("hiring ratios must satisfy alpha_j >= 1")
        if np.any((self.p < 0.0) | (self.p > 1.0)):
            raise ValueError("permanent shares must lie in [0, 1]")
        return self


def validate(spec: OrgSpec) -> OrgSpec:
    """Check every structural invariant, aggregating all violations."""
    violations = []
    for j, lv in enumerate(spec.levels, start=1):
        if not lv.headcount > 0:
            violations.append(f"level {j}: headcount {lv.headcount} is not positive")
        if not lv.attrition > 0:
            violations.append(f"level {j}: attrition {lv.attrition} is not positive")
        elif spec.wage_growth >= lv.attrition:
            violations.append(
                f"level {j}: wage growth {spec.wage_growth} must stay below "
                f"attrition {lv.attrition}"
            )
        if lv.eligibility_age < 0:
            violations.append(
                f"level {j}: eligibility age {lv.eligibility_age} is negative"
            )
        if lv.base_wage is not None and lv.temp_wage is not None:
            if not lv.temp_wage > lv.base_wage:
                violations.append(
                    f"level {j}: temp wage {lv.temp_wage} must exceed base wage "
                    f"{lv.base_wage}"
                )
    if spec.business_units is not None:
        units = np.asarray(spec.business_units, dtype=float)
        if units.ndim != 2 or units.shape[1] != spec.size:
            violations.append(
                "business_units must be a K x L array of per-unit headcounts"
            )
        else:
            if np.any(units < 0):
                violations.append("business unit headcounts must be nonnegative")
            totals = units.sum(axis=0)
            if not np.allclose(totals, spec.n, rtol=1e-9, atol=1e-9):
                violations.append(
                    "business unit headcounts do not sum to the level headcounts"
                )
    if violations:
        raise OrgValidationError(violations)
    return spec


def _level_index(spec: OrgSpec, level: int) -> int:
    if not 1 <= level <= spec.size:
        raise ValueError(f"level {level} outside 1..{spec.size}")
    return level - 1


def cumulative_attrition(spec: OrgSpec, level: int) -> float:
    """Total attrition outflow from this level upward, sum of mu_l N_l.

    Under a pure-internal no-temporaries policy this is both the boundary
    inflow a stationary level must absorb and the promotion flux demanded
    from the level below.
    """
    j = _level_index(spec, level)
    return float(np.sum(spec.mu[j:] * spec.n[j:]))


def promotion_demands(spec: OrgSpec, plan: FlexPlan | None = None) -> np.ndarray:
    """Stationary promotion fluxes C_1..C_{L+1} demanded into each level.

    C_j is the flux of internal promotions entering level j per year (for
    level 1, the external replacement flux). It satisfies the descending
    recursion alpha_j C_j = mu_j N_j p_j + C_{j+1} with C_{L+1} = 0: each
    level passes down its own permanent attrition plus the flux demanded
    from above, discounted by its external-hiring ratio.
    """
    if plan is None:
        plan = FlexPlan.all_internal(spec.size)
    alpha = plan.alpha_full
    c = np.zeros(spec.size + 1)
    for j in range(spec.size - 1, -1, -1):
        c[j] = (spec.mu[j] * spec.n[j] * plan.p[j] + c[j + 1]) / alpha[j]
    return c


def promotion_demand(spec: OrgSpec, plan: FlexPlan, level: int) -> float:
    """Stationary promotion flux C_level entering one level (see promotion_demands)."""
    j = _level_index(spec, level)
    return float(promotion_demands(spec, plan)[j])


def steady_promotable_pool(spec: OrgSpec, plan: FlexPlan | None = None,
                           level: int | None = None):
    """Stationary promotable mass A_j beyond the eligibility age.

    For j < L:  A_j = (mu_j N_j p_j e^{-mu_j tau_j}
                       - (1 - e^{-mu_j tau_j}) C_{j+1}) / mu_j.
    A positive value is exactly the well-posedness condition for the
    stationary profile. The top level faces no promotion demand and its
    pool is the plain exponential tail N_L p_L e^{-mu_L tau_L}.

    With level=None, returns the full vector A_1..A_L.
    """
    if plan is None:
        plan = FlexPlan.all_internal(spec.size)
    c = promotion_demands(spec, plan)
    decay = np.exp(-spec.mu * spec.tau)
    filled = -np.expm1(-spec.mu * spec.tau)  # 1 - e^{-mu tau}
    pools = (spec.mu * spec.n * plan.p * decay - filled * c[1:]) / spec.mu
    pools[-1] = spec.n[-1] * plan.p[-1] * decay[-1]
    if level is None:
        return pools
    return float(pools[_level_index(spec, level)])


def min_permanent_share(spec: OrgSpec, plan: FlexPlan, level: int) -> float:
    """Smallest permanent share keeping this level's promotable pool positive.

    p_j^min = (1 - e^{-mu_j tau_j}) C_{j+1} / (mu_j N_j e^{-mu_j tau_j});
    it depends only on the plan entries of the levels above. A share
    strictly above it is equivalent to A_j > 0.
    """
    j = _level_index(spec, level)
    c_next = promotion_demands(spec, plan)[j + 1]
    decay = math.exp(-spec.mu[j] * spec.tau[j])
    filled = -math.expm1(-spec.mu[j] * spec.tau[j])
    return filled * c_next / (spec.mu[j] * spec.n[j] * decay)


def min_external_ratios(spec: OrgSpec,
                        margin: float = FEASIBILITY_MARGIN) -> np.ndarray:
    """Smallest hiring ratios alpha_2..alpha_L keeping a no-temporaries
    organization well posed.

    Works down from the top: with the ratios above level j already fixed at
    their minima, the pool below stays at or above margin * N_{j-1} iff

        alpha_j >= (1 - e^{-mu_{j-1} tau_{j-1}}) (mu_j N_j + C_{j+1})
                   / (mu_{j-1} N_{j-1} (e^{-mu_{j-1} tau_{j-1}} - margin)),

    clipped below at 1. Entries above 1 mark levels whose replacement needs
    exceed what the level below can supply internally.
    """
    if spec.size < 2:
        return np.zeros(0)
    ratios = np.ones(spec.size - 1)
    c_next = 0.0  # C_{j+1} built from the minimal ratios above
    for j in range(spec.size - 1, 0, -1):  # 0-based level j, promoting j-1
        decay = math.exp(-spec.mu[j - 1] * spec.tau[j - 1])
        filled = -math.expm1(-spec.mu[j - 1] * spec.tau[j - 1])
        supply = spec.mu[j - 1] * spec.n[j - 1] * (decay - margin)
        if supply <= 0:
            raise ValueError(
                f"level {j}: eligibility window too long to feed level {j + 1}"
            )
        demand = spec.mu[j] * spec.n[j] + c_next
        ratios[j - 1] = max(1.0, filled * demand / supply)
        c_next = demand / ratios[j - 1]
    return ratios


@dataclass
class SteadyState:
    """Closed-form stationary profile of every level under a plan.

    pool            promotable masses A_j (top level: exponential tail)
    promotion_rate  P_j = C_{j+1} / A_j, zero at the top
    tail_decay      extra decay rate beyond tau_j (equals P_j here)
    inflow          boundary density rho_j(0) = mu_j N_j p_j + C_{j+1}
    """

    spec: OrgSpec
    plan: FlexPlan
    pool: np.ndarray
    promotion_rate: np.ndarray
    tail_decay: np.ndarray
    inflow: np.ndarray
    demands: np.ndarray = field(repr=False)

    def density(self, level: int, s) -> np.ndarray:
        """Stationary seniority density of one level, vectorized over s.

        rho_j(s) = inflow_j * exp(-mu_j s - B_j max(s - tau_j, 0)); it
        integrates to the permanent pool N_j p_j.
        """
        j = _level_index(self.spec, level)
        s = np.asarray(s, dtype=float)
        excess = np.maximum(s - self.spec.tau[j], 0.0)
        return self.inflow[j] * np.exp(-self.spec.mu[j] * s
                                       - self.tail_decay[j] * excess)

    @property
    def permanent_mass(self) -> np.ndarray:
        return self.spec.n * self.plan.p


def stationary_state(spec: OrgSpec, plan: FlexPlan | None = None) -> SteadyState:
    """Assemble the stationary profile, or raise IllPosedError.

    Ill-posedness means some level below the top cannot hold a positive
    promotable pool against the promotion flux demanded from above; the
    exception lists every such level.
    """
    if plan is None:
        plan = FlexPlan.all_internal(spec.size)
    plan.check(spec)
    c = promotion_demands(spec, plan)
    pools = steady_promotable_pool(spec, plan)
    bad = [j for j in range(spec.size - 1) if pools[j] <= 0.0]
    if bad:
        raise IllPosedError([j + 1 for j in bad], [pools[j] for j in bad])
    rate = np.zeros(spec.size)
    rate[:-1] = c[1:-1] / pools[:-1]
    inflow = spec.mu * spec.n * plan.p + c[1:]
    return SteadyState(
        spec=spec,
        plan=plan,
        pool=pools,
        promotion_rate=rate,
        tail_decay=rate.copy(),
        inflow=inflow,
        demands=c,
    )


@dataclass
class InitialConditionReport:
    """Worst-case pool margins for a starting density, per level.

    margin[j] is the minimum over the sampled window of the promotable
    pool the transported data would produce; holds[j] says it stayed
    strictly positive, so promotion rates remain finite for all time.
    """

    margins: np.ndarray
    holds: np.ndarray

    @property
    def ok(self) -> bool:
        return bool(np.all(self.holds))


def check_initial_condition(spec: OrgSpec, plan: FlexPlan,
                            rho0: Sequence[Callable[[np.ndarray], np.ndarray]],
                            n_time: int = 101,
                            mass_rel_tol: float = 1e-3) -> InitialConditionReport:
    """Check that starting densities keep every promotable pool positive.

    Before the first cohort of new entrants reaches the eligibility age,
    the pool at time t is driven by the transported initial data:

        A_j(t) = N_j p_j - e^{-mu_j t} int_0^{tau_j - t} rho0_j(u) du
                 - (1 - e^{-mu_j t}) (mu_j N_j p_j + C_{j+1}) / mu_j,

    and positivity on t in [0, tau_j] guarantees it for all later times.
    The margin is evaluated on n_time uniformly spaced points (at least
    100). Callables must accept numpy arrays. Raises MassMismatchError
    when a density does not integrate to its permanent pool N_j p_j.
    """
    if len(rho0) != spec.size:
        raise ValueError(f"expected {spec.size} densities, got {len(rho0)}")
    n_time = max(int(n_time), 100)
    c = promotion_demands(spec, plan)
    margins = np.zeros(spec.size)
    for j in range(spec.size):
        mass_goal = spec.n[j] * plan.p[j]
        span = spec.tau[j] + 40.0 / spec.mu[j]
        grid = np.linspace(0.0, span, 8001)
        values = np.asarray(rho0[j](grid), dtype=float)
        mass = float(np.trapezoid(values, grid))
        if mass_goal > 0 and abs(mass - mass_goal) > mass_rel_tol * mass_goal:
            raise MassMismatchError(
                f"level {j + 1}: initial density integrates to {mass:.6g}, "
                f"expected {mass_goal:.6g}"
            )
        tau = spec.tau[j]
        if tau <= 0.0:
            margins[j] = mass_goal
            continue
        # cumulative integral of rho0 on a fine [0, tau] grid
        fine = np.linspace(0.0, tau, 4001)
        dens = np.asarray(rho0[j](fine), dtype=float)
        cum = np.concatenate(([0.0], np.cumsum((dens[1:] + dens[:-1]) * 0.5
                                               * np.diff(fine))))
        times = np.linspace(0.0, tau, n_time)
        carried = np.interp(tau - times, fine, cum)
        inflow = spec.mu[j] * mass_goal + c[j + 1]
        filled = -np.expm1(-spec.mu[j] * times)
        lhs = np.exp(-spec.mu[j] * times) * carried + filled * inflow / spec.mu[j]
        margins[j] = float(np.min(mass_goal - lhs))
    return InitialConditionReport(margins=margins, holds=margins > 0.0)
