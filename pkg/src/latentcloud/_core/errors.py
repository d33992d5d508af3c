"""Exceptions shared by the compiled and pure compute backends."""


class RipsBudgetError(MemoryError):
    """Raised when a filtration would exceed the simplex budget."""

    def __init__(self, simplex_count: int, budget: int):
        self.simplex_count = simplex_count
        self.budget = budget
        super().__init__(
            f"Rips filtration needs more than {budget} simplex entries "
            f"(reached {simplex_count}); lower max_edge/max_dim or raise the budget"
        )
