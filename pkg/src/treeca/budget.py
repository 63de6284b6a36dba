"""State-space budget shared by every enumeration."""

import os

from .errors import BudgetExceeded

DEFAULT_BUDGET = 2**26
ENV_VAR = "TREECA_BUDGET"


def resolve(budget: int | None = None) -> int:
    """Explicit value first, then the environment, then the default."""
    if budget is not None:
        return int(budget)
    env = os.environ.get(ENV_VAR)
    if env:
        return int(env)
    return DEFAULT_BUDGET


def require(required: int, budget: int | None = None, what: str = "enumeration") -> int:
    limit = resolve(budget)
    if required > limit:
        raise BudgetExceeded(required, limit, what)
    return limit
