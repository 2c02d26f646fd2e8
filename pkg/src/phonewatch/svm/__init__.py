"""From-scratch binary nu-SVC: kernels, dual solver, bias and prediction."""
from .kernels import KINDS, LINEAR, POLYNOMIAL, RBF, SIGMOID, KernelSpec, gram, kernel_eval
from .model import SvmModel, compute_bias, dumps, load, loads, predict, save, train, train_dual
from .solver import DualSolution, check_nu, dual_objective, solve_nu_dual

__all__ = [
    "KINDS", "LINEAR", "POLYNOMIAL", "RBF", "SIGMOID", "KernelSpec", "gram", "kernel_eval",
    "SvmModel", "compute_bias", "dumps", "load", "loads", "predict", "save", "train",
    "train_dual", "DualSolution", "check_nu", "dual_objective", "solve_nu_dual",
]
