"""TCP server speaking the feature protocol.

Each connection is a loop of request/response exchanges. Any protocol or
inference error sends a single error frame and closes the connection, so a
client can never desynchronize from a half-written response.
"""

import logging
import socket
import threading
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import protocol

log = logging.getLogger("featservice")


def _read_exact(conn, n, allow_eof=False):
    buf = bytearray()
    while len(buf) < n:
        chunk = conn.recv(n - len(buf))
        if not chunk:
            if allow_eof and not buf:
                return None
            raise ConnectionError(f"peer closed after {len(buf)} of {n} bytes")
        buf.extend(chunk)
    return bytes(buf)


class FeatureServer:
    """Serves a FeatureModel on a localhost TCP port.

    One worker handles connections sequentially; more workers serve
    independent connections in parallel. The model is the only shared
    state and is read-only.
    """

    def __init__(self, model, host="127.0.0.1", port=0, workers=1):
        self.model = model
        self.host = host
        self.workers = max(1, int(workers))
        self._requested_port = port
        self._sock = None
        self._pool = None
        self._accept_thread = None
        self._stopping = threading.Event()

    @property
    def port(self) -> int:
        return self._sock.getsockname()[1]

    def start(self):
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((self.host, self._requested_port))
        self._sock.listen(8)
        self._pool = ThreadPoolExecutor(max_workers=self.workers)
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()
        return self

    def stop(self):
        self._stopping.set()
        if self._sock is not None:
            self._sock.close()
        if self._accept_thread is not None:
            self._accept_thread.join(timeout=5.0)
        if self._pool is not None:
            self._pool.shutdown(wait=False, cancel_futures=True)

    def wait(self):
        self._accept_thread.join()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc_info):
        self.stop()

    def _accept_loop(self):
        while not self._stopping.is_set():
            try:
                conn, peer = self._sock.accept()
            except OSError:
                return  # listening socket closed by stop()
            log.debug("connection from %s:%d", *peer)
            self._pool.submit(self._handle, conn)

    def _handle(self, conn):
        patch = self.model.patch_size
        with conn:
            conn.settimeout(30.0)
            try:
                while True:
                    magic = _read_exact(conn, 4, allow_eof=True)
                    if magic is None:
                        return
                    if magic != protocol.MAGIC_REQUEST:
                        conn.sendall(protocol.pack_error(protocol.ERR_BAD_MAGIC))
                        return
                    w, h, c = protocol.DIMS.unpack(_read_exact(conn, 12))
                    if (w, h, c) != (patch, patch, 3):
                        conn.sendall(protocol.pack_error(protocol.ERR_BAD_DIMS))
                        return
                    payload = _read_exact(conn, w * h * c)
                    try:
                        pixels = np.frombuffer(payload, dtype=np.uint8).reshape(h, w, c)
                        layers = self.model.extract(pixels)
                        if not all(np.isfinite(a).all() for a in layers):
                            raise ArithmeticError("non-finite activations")
                        frame = protocol.pack_response(layers)
                    except Exception:
                        log.exception("inference failed")
                        conn.sendall(protocol.pack_error(protocol.ERR_INFERENCE))
                        return
                    conn.sendall(frame)
            except (ConnectionError, socket.timeout) as exc:
                log.debug("connection dropped: %s", exc)
