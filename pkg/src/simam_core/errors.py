# -*- coding: utf-8 -*-


class SimamError(Exception):
    pass


class ShapeError(SimamError, ValueError):
    pass


class ConfigError(SimamError, ValueError):
    pass


class DataError(SimamError, ValueError):
    pass


class TrainingDiverged(SimamError, RuntimeError):
    def __init__(self, message, checkpoint_path=None):
        super().__init__(message)
        self.checkpoint_path = checkpoint_path


class VerificationFailed(SimamError, AssertionError):
    pass


class DegenerateProblem(SimamError, ValueError):
    pass


class NonFiniteError(SimamError, ValueError):
    pass
