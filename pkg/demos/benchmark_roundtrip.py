"""
Benchmark round trip: track, evaluate, dump plot data
=====================================================

Writes a synthetic sequence to disk in the standard benchmark layout
(img/0001.png ... plus one-indexed groundtruth_rect.txt), then drives the
command-line interface end to end: track to a box CSV, score it against
the ground truth, and merge the metrics into plot-ready CSVs.
"""

import json
import tempfile
from pathlib import Path

from PIL import Image

from mlcf import cli
from mlcf.synthetic import drifting_sequence

root = Path(tempfile.mkdtemp(prefix="mlcf_demo_"))
frames, boxes = drifting_sequence(seed=6, n_frames=20)

seq = root / "drift"
(seq / "img").mkdir(parents=True)
for i, frame in enumerate(frames):
    Image.fromarray(frame.pixels).save(seq / "img" / f"{i + 1:04d}.png")
lines = [f"{b.x + 1},{b.y + 1},{b.w},{b.h}" for b in boxes]
(seq / "groundtruth_rect.txt").write_text("\n".join(lines) + "\n")

config = root / "fast.cfg"
config.write_text("patch_size = 64\ns = 3\n")

csv = root / "drift_boxes.csv"
assert cli.main(["track", "--sequence", str(seq), "--config", str(config),
                 "--output", str(csv)]) == 0
print(f"wrote {csv}")
print("\n".join(csv.read_text().splitlines()[:3]))

metrics = root / "drift_metrics.json"
assert cli.main(["eval", "--boxes", str(csv), "--sequence", str(seq),
                 "--output", str(metrics)]) == 0
report = json.loads(metrics.read_text())
print(f"DP@20 {report['dp20']:.3f}  AUC {report['auc']:.3f}")

assert cli.main(["plotdata", f"demo={metrics}", "--output-dir", str(root)]) == 0
print(f"plot data in {root / 'precision.csv'} and {root / 'success.csv'}")
