"""
Tracking a slow zoom with the scale pyramid
===========================================

The target grows 2% per frame. Each step the tracker scores a small
pyramid of candidate scales on the raw fused response and keeps the best,
so the box size follows the zoom within a few percent.
"""

from mlcf.pipeline import TrackerConfig, init, track
from mlcf.synthetic import zoom_sequence

frames, boxes = zoom_sequence(seed=1, n_frames=31, rate=1.02)
state = init(frames[0], boxes[0], TrackerConfig(patch_size=112))

print("frame  estimated  true   box width")
for t, frame in enumerate(frames[1:], start=1):
    state, box, diag = track(state, frame)
    true = 1.02 ** t
    if t % 5 == 0 or t == 1:
        print(
            f"{t:>4}   {state.scale.current_scale:.3f}     {true:.3f}  {box.w:6.1f}"
        )

final = state.scale.current_scale
true = 1.02 ** 30
print(f"final relative error: {abs(final - true) / true:.3f}")
