"""Binary-encoded genetic algorithm for SVM hyperparameter search.

A chromosome is 116 bits: four 29-bit unsigned fields for nu, coef0, degree
and gamma (in that order), each mapped linearly onto a configurable range.
Selection is by tournament, crossover is single-point, mutation flips bits
independently, and the best individual is always carried over unchanged.
"""
from __future__ import annotations

import csv
from concurrent.futures import Executor
from dataclasses import dataclass, field

import numpy as np

from .errors import PhoneWatchError
from .svm import KernelSpec
from .svm.kernels import USES

CHROMOSOME_BITS = 116
FIELD_BITS = 29
PARAM_ORDER = ("nu", "coef0", "degree", "gamma")
FIELD_MAX = (1 << FIELD_BITS) - 1

DEFAULT_RANGES = {
    "nu": (0.001, 0.999),
    "coef0": (0.0, 10000.0),
    "degree": (0.01, 10.0),
    "gamma": (0.001, 10000.0),
}


@dataclass(frozen=True)
class GaConfig:
    population: int = 20
    generations: int = 10_000
    crossover_rate: float = 0.80
    mutation_rate: float = 0.05
    tournament_size: int = 2
    seed: int = 0
    parameter_ranges: dict = field(default_factory=lambda: dict(DEFAULT_RANGES))

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be at least 2")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be positive")
        for key, (lo, hi) in self.parameter_ranges.items():
            if key not in PARAM_ORDER or lo > hi:
                raise ValueError(f"bad parameter range {key}: ({lo}, {hi})")


@dataclass(frozen=True)
class Decoded:
    kernel: KernelSpec
    nu: float
    raw: dict  # every field's decoded value, used or not


def field_values(bits: np.ndarray) -> list[int]:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape != (CHROMOSOME_BITS,):
        raise ValueError(f"chromosome must have {CHROMOSOME_BITS} bits, got {bits.shape}")
    out = []
    for k in range(len(PARAM_ORDER)):
        chunk = bits[k * FIELD_BITS : (k + 1) * FIELD_BITS]
        out.append(int("".join("1" if b else "0" for b in chunk), 2))
    return out


def decode(bits, kernel_kind: str, ranges: dict | None = None) -> Decoded:
    ranges = {**DEFAULT_RANGES, **(ranges or {})}
    raw = {}
    for name, value in zip(PARAM_ORDER, field_values(bits)):
        lo, hi = ranges[name]
        raw[name] = lo + (hi - lo) * value / FIELD_MAX
        if value == FIELD_MAX:
            raw[name] = hi  # exact endpoint despite rounding
    kparams = {k: raw[k] for k in USES[kernel_kind]}
    return Decoded(KernelSpec(kernel_kind, **kparams), raw["nu"], raw)


def fitness(bits, X, y, kernel_kind: str, folds: int = 9, seed: int = 0,
            ranges: dict | None = None) -> float:
    """Mean k-fold accuracy of the decoded parameters; any training failure scores 0."""
    from .evaluation import cross_validate

    try:
        d = decode(bits, kernel_kind, ranges)
    except PhoneWatchError:
        return 0.0
    result = cross_validate(X, y, d.kernel, d.nu, k=folds, seed=seed)
    if result.failures:
        return 0.0
    return result.mean


@dataclass
class GenerationStats:
    generation: int
    best_fitness: float  # best ever, so non-decreasing
    mean_fitness: float
    best_bits: np.ndarray


@dataclass
class EvolutionResult:
    best_bits: np.ndarray
    best_fitness: float
    history: list
    kernel_kind: str
    ranges: dict

    def best(self) -> Decoded:
        return decode(self.best_bits, self.kernel_kind, self.ranges)


def _tournament(rng, fit, size):
    idx = rng.integers(0, fit.size, size=size)
    return int(idx[np.argmax(fit[idx])])


def evolve(config: GaConfig, fitness_fn, kernel_kind: str, *, initial=None,
           executor: Executor | None = None, on_generation=None) -> EvolutionResult:
    """Run the GA.  ``fitness_fn(bits) -> float`` must be deterministic.

    ``executor`` may evaluate a generation's new individuals concurrently;
    all random draws happen in this loop, so results do not depend on it.
    """
    rng = np.random.default_rng(config.seed)
    if initial is None:
        pop = rng.integers(0, 2, size=(config.population, CHROMOSOME_BITS), dtype=np.uint8)
    else:
        pop = np.array(initial, dtype=np.uint8).reshape(config.population, CHROMOSOME_BITS)

    cache: dict[bytes, float] = {}

    def evaluate(population):
        todo = []
        for row in population:
            key = row.tobytes()
            if key not in cache and key not in todo:
                todo.append(key)
        rows = [np.frombuffer(k, dtype=np.uint8) for k in todo]
        scores = executor.map(fitness_fn, rows) if executor else map(fitness_fn, rows)
        for key, score in zip(todo, scores):
            cache[key] = float(score)
        return np.array([cache[row.tobytes()] for row in population])

    history = []
    best_bits, best_fit = None, -np.inf
    for gen in range(config.generations):
        fit = evaluate(pop)
        i = int(np.argmax(fit))
        if fit[i] > best_fit:
            best_fit, best_bits = float(fit[i]), pop[i].copy()
        stats = GenerationStats(gen, best_fit, float(fit.mean()), best_bits.copy())
        history.append(stats)
        if on_generation is not None:
            on_generation(stats, pop)
        if gen == config.generations - 1:
            break

        children = [best_bits.copy()]  # elitism
        while len(children) < config.population:
            a = pop[_tournament(rng, fit, config.tournament_size)].copy()
            b = pop[_tournament(rng, fit, config.tournament_size)].copy()
            if rng.random() < config.crossover_rate:
                cut = int(rng.integers(1, CHROMOSOME_BITS))
                a[cut:], b[cut:] = b[cut:].copy(), a[cut:].copy()
            for child in (a, b):
                flips = rng.random(CHROMOSOME_BITS) < config.mutation_rate
                child ^= flips.astype(np.uint8)
                if len(children) < config.population:
                    children.append(child)
        pop = np.array(children)

    return EvolutionResult(best_bits, best_fit, history, kernel_kind,
                           {**DEFAULT_RANGES, **config.parameter_ranges})


def write_log(path, results) -> None:
    """GA run log: one row per restart and generation, with the decoded best parameters."""
    if isinstance(results, EvolutionResult):
        results = [results]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["restart", "generation", "best_fitness", "mean_fitness", *PARAM_ORDER])
        for run, result in enumerate(results):
            for s in result.history:
                d = decode(s.best_bits, result.kernel_kind, result.ranges)
                w.writerow([run, s.generation, repr(s.best_fitness), repr(s.mean_fitness),
                            *(repr(d.raw[p]) for p in PARAM_ORDER)])
