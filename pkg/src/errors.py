# src/errors.py


class SpinBosonError(Exception):
    """Root of every error raised by this package."""


class WidthError(SpinBosonError, ValueError):
    """Register widths disagree or exceed what a dense backend can hold."""


class LevelOutOfRangeError(SpinBosonError, ValueError):
    pass


class IdentityTermError(SpinBosonError, ValueError):
    """An identity-only Pauli string was handed to a circuit builder."""


class OracleDriftError(SpinBosonError, RuntimeError):
    """The master-equation integrator lost trace or Hermiticity."""


class NonNativeGateError(SpinBosonError, ValueError):
    pass


class DeviceTooSmallError(SpinBosonError, ValueError):
    pass


class CalibrationError(SpinBosonError, ValueError):
    pass


class ChannelError(SpinBosonError, ValueError):
    """A channel failed its complete-positivity or trace-preservation check."""


class StateInvariantError(SpinBosonError, RuntimeError):
    """A simulated density matrix drifted outside its tolerances."""


class SingularConfusionError(SpinBosonError, ValueError):
    pass


class ConfigError(SpinBosonError, ValueError):
    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__(
            "invalid experiment configuration:\n  - " + "\n  - ".join(self.problems)
        )


class OutputError(SpinBosonError, RuntimeError):
    pass
