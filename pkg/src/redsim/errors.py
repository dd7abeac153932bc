"""Exception types shared by the engines, generators and CLI."""


class BoundViolationError(RuntimeError):
    """A model's rate exceeded the over-approximation it advertised.

    This is never sampling noise: it means ``model.bound`` is not a valid
    upper bound for ``model.rate`` and the run cannot be trusted.
    """

    def __init__(self, agent, state, rate, bound, time=None, model=None):
        self.agent = agent
        self.state = state
        self.rate = rate
        self.bound = bound
        self.time = time
        self.model = model
        where = f" at t={time:.6g}" if time is not None else ""
        who = f" in model {model}" if model else ""
        super().__init__(
            f"rate {rate!r} exceeds bound {bound!r} for agent {agent} "
            f"(state {state}){where}{who}"
        )


class EdgeListError(ValueError):
    """Malformed edge-list input; ``lineno`` is 1-based."""

    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")
