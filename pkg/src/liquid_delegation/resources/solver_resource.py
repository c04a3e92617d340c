import os
from typing import Optional

from dagster import ConfigurableResource

from liquid_delegation.errors import InvalidInputError
from liquid_delegation.game.digraph import DEFAULT_KERNEL_BOUND
from liquid_delegation.game.dynamics import default_budget
from liquid_delegation.game.gadgets import DEFAULT_SAT_BOUND


class SolverSettings(ConfigurableResource):
    """Size guards, dynamics budget and seed shared by every solver entry point."""

    kernel_vertex_bound: int = DEFAULT_KERNEL_BOUND
    sat_variable_bound: int = DEFAULT_SAT_BOUND
    budget_round_offset: int = 2
    default_seed: int = 0
    hardness_refusal: bool = True

    @classmethod
    def from_env(cls, **overrides) -> "SolverSettings":
        """Defaults overridden by DELEGATION_KERNEL_BOUND and DELEGATION_SEED, then by keyword arguments."""
        values = {}
        for field, variable in (("kernel_vertex_bound", "DELEGATION_KERNEL_BOUND"), ("default_seed", "DELEGATION_SEED")):
            raw = os.getenv(variable)
            if raw is None:
                continue
            try:
                values[field] = int(raw)
            except ValueError as e:
                raise InvalidInputError(f"{variable} must be an integer, got {raw!r}") from e
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def brd_budget_steps(self, n: int, rounds: Optional[int] = None) -> int:
        """Step budget for n voters: n·(n + offset) rounds of n steps unless a round count is given."""
        if rounds is not None:
            return rounds * n
        return default_budget(n, self.budget_round_offset)
