from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError, KernelDomainError

LINEAR = "linear"
POLYNOMIAL = "polynomial"
RBF = "rbf"
SIGMOID = "sigmoid"
KINDS = (LINEAR, POLYNOMIAL, RBF, SIGMOID)

# which hyperparameters each kernel reads
USES = {
    LINEAR: (),
    POLYNOMIAL: ("gamma", "coef0", "degree"),
    RBF: ("gamma",),
    SIGMOID: ("gamma", "coef0"),
}


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus its hyperparameters.

    ``degree`` is a real number: tuned polynomial kernels may use fractional
    exponents, in which case a negative base is a domain error.
    """

    kind: str
    gamma: float = 1.0
    coef0: float = 0.0
    degree: float = 3.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown kernel kind {self.kind!r}")
        if "gamma" in USES[self.kind] and not self.gamma > 0:
            raise InvalidInputError(f"{self.kind} kernel needs gamma > 0, got {self.gamma}")

    def params(self) -> dict:
        return {name: getattr(self, name) for name in USES[self.kind]}


def gram(spec: KernelSpec, A, B) -> np.ndarray:
    """Kernel matrix ``K[i, j] = k(A[i], B[j])``."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise InvalidInputError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    if spec.kind == RBF:
        sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
        K = np.exp(-spec.gamma * np.maximum(sq, 0.0))
    else:
        dot = A @ B.T
        if spec.kind == LINEAR:
            K = dot
        elif spec.kind == POLYNOMIAL:
            with np.errstate(invalid="ignore", over="ignore"):
                K = np.power(spec.gamma * dot + spec.coef0, spec.degree)
        else:
            K = np.tanh(spec.gamma * dot + spec.coef0)
    if not np.all(np.isfinite(K)):
        raise KernelDomainError(f"{spec.kind} kernel produced non-finite values ({spec})")
    return K


def kernel_eval(spec: KernelSpec, a, b) -> float:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise InvalidInputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if spec.kind == RBF:
        d = a - b
        val = np.exp(-spec.gamma * float(d @ d))
    elif spec.kind == LINEAR:
        val = float(a @ b)
    elif spec.kind == POLYNOMIAL:
        with np.errstate(invalid="ignore", over="ignore"):
            val = np.power(spec.gamma * float(a @ b) + spec.coef0, spec.degree)
    else:
        val = np.tanh(spec.gamma * float(a @ b) + spec.coef0)
    if not np.isfinite(val):
        raise KernelDomainError(f"{spec.kind} kernel produced a non-finite value ({spec})")
    return float(val)
