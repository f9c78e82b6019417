"""
Adaptive learning rate through an occlusion
===========================================

Watch the per-frame confidence and learning rate while the target sits
still, vanishes behind a blank frame, then comes back. The model freezes
(rate 0) exactly while the evidence is bad, so the occluder is never
learned into the filter.
"""

import numpy as np

from mlcf.pipeline import TrackerConfig, init, track
from mlcf.synthetic import make_canvas, static_sequence, to_frame

frames, boxes = static_sequence(seed=4, n_frames=12)
blank = to_frame(make_canvas(160, 120))

# splice a short occlusion into the middle of the run; on blank frames the
# position drifts on noise, so it must stay within re-acquisition range
schedule = frames[1:7] + [blank] * 2 + frames[7:]

state = init(frames[0], boxes[0], TrackerConfig(patch_size=64, s=1))
print("frame  score   confidence  rate")
for t, frame in enumerate(schedule, start=1):
    state, box, diag = track(state, frame)
    tag = "  <- occluded" if frame is blank else ""
    print(f"{t:>4}   {diag.score:.3f}  {diag.c_t:+.3f}      {diag.eta_t:.4f}{tag}")
