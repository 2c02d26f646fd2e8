from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DegenerateModelError, InvalidInputError
from .kernels import KernelSpec, gram
from .solver import DEFAULT_MAX_ITER, DEFAULT_TOL, DualSolution, solve_nu_dual

SV_THRESHOLD = 1e-8
FORMAT_HEADER = "phonewatch-svm 1"


@dataclass(frozen=True, eq=False)
class SvmModel:
    """A trained binary nu-SVC.

    Support vectors are stored in the scaled feature space; ``scale_min`` and
    ``scale_span`` map raw features into it (``(x - min) / span``).
    """

    kernel: KernelSpec
    nu: float
    support_vectors: np.ndarray
    lambdas: np.ndarray  # y_i * alpha_i
    bias: float
    scale_min: np.ndarray
    scale_span: np.ndarray
    c_eff: float = float("nan")

    @property
    def dim(self) -> int:
        return self.scale_min.size

    def transform(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dim:
            raise InvalidInputError(f"model expects {self.dim} features, got {X.shape[1]}")
        return (X - self.scale_min) / self.scale_span

    def decision_function(self, X) -> np.ndarray:
        Z = self.transform(X)
        return gram(self.kernel, Z, self.support_vectors) @ self.lambdas + self.bias

    def predict(self, X) -> np.ndarray:
        return np.sign(self.decision_function(X)).astype(int)


def fit_scaling(X: np.ndarray):
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    span = np.where(span > 0, span, 1.0)
    return lo, span


def compute_bias(alpha: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    """Average of ``y_j - sum_i y_i a_i K(x_i, x_j)`` over every support vector."""
    sv = alpha > SV_THRESHOLD
    if not sv.any():
        raise DegenerateModelError("no support vectors")
    g = K[:, sv].T @ (alpha * y)
    return float(np.mean(y[sv] - g))


def train_dual(X, y, kernel: KernelSpec, nu: float, *, scale: bool = True,
               tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER):
    """Train and also return the full dual solution and the Gram matrix used."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.shape[0] != y.size:
        raise InvalidInputError(f"{X.shape[0]} points but {y.size} labels")
    if scale:
        lo, span = fit_scaling(X)
    else:
        lo, span = np.zeros(X.shape[1]), np.ones(X.shape[1])
    Z = (X - lo) / span
    K = gram(kernel, Z, Z)
    sol: DualSolution = solve_nu_dual(K, y, nu, tol=tol, max_iter=max_iter)
    bias = compute_bias(sol.alpha, y, K)
    sv = sol.alpha > SV_THRESHOLD
    model = SvmModel(kernel=kernel, nu=nu, support_vectors=Z[sv], lambdas=(y * sol.alpha)[sv],
                     bias=bias, scale_min=lo, scale_span=span, c_eff=sol.c_eff)
    return model, sol, K


def train(X, y, kernel: KernelSpec, nu: float, **kwargs) -> SvmModel:
    return train_dual(X, y, kernel, nu, **kwargs)[0]


def predict(model: SvmModel, x) -> int:
    """Sign of the decision value for a single point: -1, 0 or +1."""
    return int(model.predict(np.asarray(x, dtype=np.float64).reshape(1, -1))[0])


# -- serialization ---------------------------------------------------------------


def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in np.ravel(values))


def dumps(model: SvmModel) -> str:
    k = model.kernel
    lines = [
        FORMAT_HEADER,
        f"kernel {k.kind}",
        f"gamma {k.gamma!r}",
        f"coef0 {k.coef0!r}",
        f"degree {k.degree!r}",
        f"nu {model.nu!r}",
        f"c_eff {model.c_eff!r}",
        f"scale_min {_fmt(model.scale_min)}",
        f"scale_span {_fmt(model.scale_span)}",
        f"bias {model.bias!r}",
        f"support_vectors {len(model.lambdas)}",
    ]
    for lam, sv in zip(model.lambdas, model.support_vectors):
        lines.append(f"{float(lam)!r} {_fmt(sv)}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> SvmModel:
    lines = text.splitlines()
    if not lines or lines[0].strip() != FORMAT_HEADER:
        raise InvalidInputError("not a phonewatch SVM model file (bad header)")
    fields = {}
    pos = 1
    while pos < len(lines):
        key, _, rest = lines[pos].partition(" ")
        fields[key] = rest.strip()
        pos += 1
        if key == "support_vectors":
            break
    try:
        n_sv = int(fields["support_vectors"])
        rows = [list(map(float, line.split())) for line in lines[pos : pos + n_sv]]
        kind = fields["kernel"]
        kernel = KernelSpec(kind, float(fields["gamma"]), float(fields["coef0"]),
                            float(fields["degree"]))
        lo = np.array(fields["scale_min"].split(), dtype=np.float64)
        span = np.array(fields["scale_span"].split(), dtype=np.float64)
    except (KeyError, ValueError) as exc:
        raise InvalidInputError(f"malformed model file: {exc}") from exc
    if len(rows) != n_sv or any(len(r) != lo.size + 1 for r in rows):
        raise InvalidInputError("malformed model file: support vector block")
    arr = np.array(rows, dtype=np.float64).reshape(n_sv, lo.size + 1)
    return SvmModel(kernel=kernel, nu=float(fields["nu"]), support_vectors=arr[:, 1:],
                    lambdas=arr[:, 0], bias=float(fields["bias"]), scale_min=lo,
                    scale_span=span, c_eff=float(fields.get("c_eff", "nan")))


def save(model: SvmModel, path) -> None:
    Path(path).write_text(dumps(model))


def load(path) -> SvmModel:
    return loads(Path(path).read_text())

