from .autograd import Tensor, GradTape, backward, active_tape
from . import functional

__all__ = ["Tensor", "GradTape", "backward", "active_tape", "functional"]
