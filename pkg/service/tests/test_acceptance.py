"""Acceptance gate for the feature service: protocol conformance and a
live end-to-end run with the tracker as the client.

Run `pytest tests/test_acceptance.py -v -s` to see the per-criterion line.
"""

import functools
import re
import socket
import struct

import numpy as np

from featservice import protocol
from featservice.errors import ProtocolError
from featservice.model import build_model, describe_text
from featservice.server import FeatureServer


def criterion(number, title):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                detail = fn(*args, **kwargs)
            except BaseException:
                print(f"criterion {number:>2} FAIL  {title}", flush=True)
                raise
            extra = f"  [{detail}]" if detail else ""
            print(f"criterion {number:>2} PASS  {title}{extra}", flush=True)

        return wrapper

    return decorate


def golden_request(size=32):
    """Request frame built by hand from the wire layout, not pack_request,
    so the fixture stays an independent check of the framing."""
    i, j, c = np.ogrid[:size, :size, :3]
    pixels = ((i * 7 + j * 13 + c * 29) % 256).astype(np.uint8)
    frame = b"MLFQ" + struct.pack("<III", size, size, 3) + pixels.tobytes()
    return frame, pixels


def read_frame(sock):
    buf = b""
    while True:
        try:
            return protocol.parse_response(buf)
        except ProtocolError:
            chunk = sock.recv(65536)
            if not chunk:
                return protocol.parse_response(buf)
            buf += chunk


def fetch(port, payload):
    with socket.create_connection(("127.0.0.1", port), timeout=10.0) as sock:
        sock.settimeout(10.0)
        sock.sendall(payload)
        return read_frame(sock)


@criterion(10, "service answers golden request; shapes match describe; "
               "bitwise-stable; tracker runs 5 frames through it")
def test_criterion_10_service_conformance():
    frame, pixels = golden_request()
    assert frame == protocol.pack_request(pixels)  # layouts agree

    model = build_model("seeded:5", ["stage1", "stage2", "stage3"], 32)
    with FeatureServer(model) as srv:
        kind, layers = fetch(srv.port, frame)
        assert kind == "response"

        # shapes exactly as advertised by describe, in order
        described = re.findall(r"(\w+): v=(\d+) h=(\d+) d=(\d+)",
                               describe_text(model))
        assert len(described) == len(layers) == 3
        for (name, v, h, d), arr in zip(described, layers):
            assert arr.shape == (int(v), int(h), int(d))
            assert arr.dtype == np.dtype("<f4")

        # same bytes in, same bytes out
        kind2, layers2 = fetch(srv.port, frame)
        assert kind2 == "response"
        first = b"".join(a.tobytes() for a in layers)
        second = b"".join(a.tobytes() for a in layers2)
        assert first == second

    # end to end: the tracker pulls deep features over the wire
    from mlcf.evaluation import center_error
    from mlcf.pipeline import TrackerConfig, init, track
    from mlcf.synthetic import static_sequence

    frames, boxes = static_sequence(seed=11, n_frames=5)
    track_model = build_model("seeded:5", ["stage1", "stage2"], 64)
    # one worker per client connection; the tracker keeps one open per layer
    with FeatureServer(track_model, workers=2) as srv:
        cfg = TrackerConfig(
            patch_size=64,
            s=1,
            extractor_specs=(
                "gray-cells",
                f"deep-client(host=127.0.0.1, port={srv.port}, layer=0)",
                f"deep-client(host=127.0.0.1, port={srv.port}, layer=1)",
            ),
        )
        state = init(frames[0], boxes[0], cfg)
        errs = []
        for frame_img, truth in zip(frames[1:], boxes[1:]):
            state, box, _ = track(state, frame_img)
            errs.append(center_error(box, truth))
    assert max(errs) <= 2.0
    return f"{len(first)} feature bytes stable, max track err {max(errs):.2f} px"
