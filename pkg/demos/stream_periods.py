"""
Rolling alarms and three-second verdicts
========================================

Trains an RBF model on synthetic frames, then replays a one-minute synthetic
video through the throttled worker pool.  Every frame gets a status level
from the share of positive frames in the last three seconds; afterwards the
same verdicts are grouped into fixed three-second periods and voted on at
several thresholds.

Run:  python demos/stream_periods.py [out_dir]
"""
import sys
from pathlib import Path

from phonewatch.evaluation import classify_period, ground_truth_periods, threshold_sweep
from phonewatch.pipeline import export_scenes, ingest, read_manifest
from phonewatch.streaming import SimulatedClock, run_stream
from phonewatch.svm import KernelSpec, train
from phonewatch.synthetic import make_dataset, make_sequence

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")

train_set = ingest(export_scenes(out / "train", make_dataset(40, 40, seed=5))).dataset
model = train(train_set.X, train_set.y, KernelSpec("rbf", gamma=2.0), 0.3)

#############################################################################
# 60 s at 15 fps; the driver alternates between 9 s segments with and
# without the phone, some frames lose the face, some hand poses mislead.
video = make_sequence(duration=60.0, fps=15.0, seed=6)
manifest = export_scenes(out / "video", [(f.scene, f.label) for f in video],
                         timestamps=[f.timestamp for f in video])
entries = read_manifest(manifest)

#############################################################################
# The simulated clock jumps instead of sleeping, so this runs at full speed
# yet reports the release times a real 6 fps throttle would produce.
records = list(run_stream(entries, model, base_dir=manifest.parent, workers=4, fps=6.0,
                          clock=SimulatedClock()))
for r in records[::45]:
    print(f"t={r.timestamp:5.2f}s  {r.line()}")
alarms = [r for r in records if r.alarm]
print(f"{len(alarms)} of {len(records)} frames raised the alarm")

#############################################################################
# Fixed periods: with phone when at least the threshold share of usable
# frames is positive.
verdicts = [r.verdict for r in records]
times = [r.timestamp for r in records]
truth = ground_truth_periods([e.label for e in entries], times)
for period in classify_period(verdicts, times)[:6]:
    print(period.period_index, period.frames_in_period, f"{period.positive_fraction:.2f}",
          period.decision)
for row in threshold_sweep(verdicts, times, truth):
    print(f"threshold {row.threshold:.2f}: with {row.acc_with:.3f} without "
          f"{row.acc_without:.3f} overall {row.acc_general:.3f}")
