import numpy as np
import pytest

from orgflow import LevelSpec, OrgSpec


def build_org(heads, rates, ages, base=None, temp=None, growth=0.0,
              units=None):
    levels = []
    for j, (n, mu, tau) in enumerate(zip(heads, rates, ages)):
        levels.append(LevelSpec(
            headcount=n, attrition=mu, eligibility_age=tau,
            base_wage=None if base is None else base[j],
            temp_wage=None if temp is None else temp[j],
        ))
    return OrgSpec(levels=levels, wage_growth=growth,
                   business_units=None if units is None else np.array(units))


@pytest.fixture
def low_turnover_org():
    """Five-level ladder with slow attrition below a fast-churn top."""
    return build_org([5500, 5200, 3800, 1800, 500],
                     [0.08, 0.08, 0.08, 0.08, 0.5], [4.0] * 5)


@pytest.fixture
def high_turnover_org():
    """Five-level ladder churning fast enough to starve internal supply."""
    return build_org([8000, 4000, 2500, 1000, 500],
                     [0.16, 0.16, 0.16, 0.16, 0.5], [4.0] * 5)


def costed_org(premium=None):
    """The wage-bearing ladder used across cost and optimizer tests."""
    base = [35.0, 49.0, 69.0, 96.0, 134.0]
    temp = None if premium is None else [(1.0 + premium) * w for w in base]
    return build_org([5500, 5200, 3800, 1800, 500],
                     [0.08, 0.08, 0.08, 0.08, 0.2], [4.0] * 5,
                     base=base, temp=temp, growth=0.04)


@pytest.fixture
def costed_org_plain():
    return costed_org()


@pytest.fixture
def costed_org_20():
    return costed_org(premium=0.20)
