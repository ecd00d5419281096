"""Exception types shared across the package."""


class InvalidInput(ValueError):
    """An argument violates an operation's precondition."""


class PrecisionError(ValueError):
    """A fixed-point representation is too coarse for the requested orbit range."""

    def __init__(self, required_bits: int, available_bits: int):
        self.required_bits = required_bits
        self.available_bits = available_bits
        super().__init__(
            f"insufficient precision: need at least {required_bits} fractional bits, "
            f"have {available_bits}"
        )


class Unsupported(ValueError):
    """The operation is not defined for this family of inputs."""
