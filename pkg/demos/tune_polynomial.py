"""
Searching kernel parameters with a genetic algorithm
=====================================================

A short GA run over (nu, coef0, degree, gamma) for a polynomial kernel on a
synthetic labelled set, scored by 9-fold cross-validation.  The full-size
search (population 20, 50 generations) is what ``phonewatch tune`` runs by
default; this demo keeps it small.

Run:  python demos/tune_polynomial.py [out_dir]
"""
import sys
from functools import partial
from pathlib import Path

from phonewatch.evaluation import cross_validate
from phonewatch.ga import GaConfig, evolve, fitness, write_log
from phonewatch.pipeline import export_scenes, ingest
from phonewatch.synthetic import make_dataset

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")

#############################################################################
# 60 frames with a hand blob, 60 without, written to disk and read back the
# same way real frames would be.
manifest = export_scenes(out / "frames", make_dataset(60, 60, seed=1))
report = ingest(manifest)
X, y = report.dataset.X, report.dataset.y
print(f"{len(y)} usable frames, {int((y > 0).sum())} with phone")

#############################################################################
# Each chromosome is 116 bits; fitness is the mean fold accuracy and any
# fold that fails to train scores the whole chromosome 0.
score = partial(fitness, X=X, y=y, kernel_kind="polynomial", folds=9, seed=0)


def progress(stats, population):
    print(f"gen {stats.generation:2d}  best {stats.best_fitness:.4f}  mean {stats.mean_fitness:.4f}")


result = evolve(GaConfig(population=12, generations=8, seed=3), score, "polynomial",
                on_generation=progress)
write_log(out / "ga.csv", result)

best = result.best()
print("best nu", best.nu, "kernel", best.kernel)
cv = cross_validate(X, y, best.kernel, best.nu, k=9, seed=0)
print(f"9-fold accuracy {cv.mean:.4f} (std {cv.std:.4f})")
