"""Exception types shared across the package."""


class GCHError(Exception):
    """Base class for all errors raised by gchlab."""


class NonFiniteError(GCHError, ValueError):
    """A field contains NaN or Inf where finite values are required."""


class BlowUpError(GCHError, ArithmeticError):
    """An intermediate product overflowed during a right-hand-side evaluation."""


class HypothesisError(GCHError, ValueError):
    """Parameters fall outside the range in which an inequality is stated."""


class ConfigError(GCHError, ValueError):
    """Invalid scenario configuration. ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class SnapshotError(GCHError, OSError):
    """Corrupt, truncated or incompatible snapshot file."""


class StepLimitReached(GCHError):
    """``max_steps`` was exhausted before reaching ``t_end``.

    Distinct from wave breaking; the partial state is attached.
    """

    def __init__(self, state):
        super().__init__(f"step limit reached at t={state.t!r} after {state.step} steps")
        self.state = state
