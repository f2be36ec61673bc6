"""Adapter for classifiers running in a child process.

Wire protocol (newline-delimited JSON over the child's stdin/stdout):

  child -> parent on start:
    {"type":"hello","classes":K,"input_shape":[C,H,W],"layers":[...],
     "capabilities":["logits"] or ["logits","layer_taps"]}
  parent -> child:
    {"type":"infer","id":u64,"shape":[N,C,H,W],"dtype":"f32le",
     "data":"<base64>", "taps":[names]}          # taps optional
  child -> parent:
    {"type":"result","id":u64,"logits":[[...K floats...] x N],
     "taps":{name:{"shape":[...],"data":"<base64 f32le>"}}}
  or {"type":"error","id":u64,"message":"..."}

One request is in flight per child at a time.
"""

import base64
import json
import queue
import subprocess
import threading

import numpy as np

from .network import ModelHandle

__all__ = ["ExternalModelError", "ExternalModel", "external_model"]

DEFAULT_TIMEOUT = 60.0


class ExternalModelError(RuntimeError):
    pass


def _encode_f32(batch: np.ndarray) -> str:
    return base64.b64encode(
        np.ascontiguousarray(batch, dtype="<f4").tobytes()
    ).decode("ascii")


def _decode_f32(data: str, shape) -> np.ndarray:
    raw = base64.b64decode(data)
    expected = int(np.prod(shape)) * 4
    if len(raw) != expected:
        raise ExternalModelError(
            f"tap payload has {len(raw)} bytes, expected {expected}"
        )
    return np.frombuffer(raw, dtype="<f4").reshape(shape).astype(np.float64)


class ExternalModel(ModelHandle):
    """ModelHandle speaking the NDJSON protocol to a child process."""

    def __init__(self, command, timeout: float = DEFAULT_TIMEOUT):
        self.command = list(command)
        self.timeout = timeout
        self.model_id = "external:" + " ".join(self.command)
        self._lock = threading.Lock()
        self._next_id = 0
        self._proc = subprocess.Popen(
            self.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

        hello = self._read_message()
        if hello.get("type") != "hello":
            raise ExternalModelError(f"expected hello, got {hello.get('type')!r}")
        try:
            self.class_count = int(hello["classes"])
            self.input_shape = tuple(int(d) for d in hello["input_shape"])
            self.layer_names = list(hello.get("layers", []))
        except (KeyError, TypeError, ValueError) as exc:
            raise ExternalModelError(f"malformed hello message: {exc}") from exc
        caps = set(hello.get("capabilities", ["logits"]))
        self.capabilities = frozenset(caps & {"logits", "layer_taps"})

    def _pump(self):
        try:
            for line in self._proc.stdout:
                self._lines.put(line)
        finally:
            self._lines.put(None)

    def _read_message(self) -> dict:
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            raise ExternalModelError(
                f"timed out after {self.timeout}s waiting for the child"
            ) from None
        if line is None:
            raise ExternalModelError(
                f"child exited (code {self._proc.poll()}) before responding"
            )
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ExternalModelError(f"invalid JSON from child: {exc}") from exc
        if not isinstance(msg, dict):
            raise ExternalModelError("child message is not a JSON object")
        return msg

    def _request(self, batch, taps=None):
        batch = np.asarray(batch, dtype=np.float64)
        if batch.ndim != 4:
            raise ValueError("expected an (N, C, H, W) batch")
        with self._lock:
            req_id = self._next_id
            self._next_id += 1
            msg = {
                "type": "infer",
                "id": req_id,
                "shape": list(batch.shape),
                "dtype": "f32le",
                "data": _encode_f32(batch),
            }
            if taps:
                msg["taps"] = list(taps)
            try:
                self._proc.stdin.write(json.dumps(msg) + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise ExternalModelError(f"child pipe closed: {exc}") from exc
            reply = self._read_message()
        if reply.get("type") == "error":
            raise ExternalModelError(
                f"child error for request {reply.get('id')}: {reply.get('message')}"
            )
        if reply.get("type") != "result" or reply.get("id") != req_id:
            raise ExternalModelError(
                f"protocol violation: expected result for id {req_id}, got {reply!r}"
            )
        try:
            logits = np.asarray(reply["logits"], dtype=np.float64)
        except (KeyError, ValueError) as exc:
            raise ExternalModelError(f"malformed result: {exc}") from exc
        if logits.shape != (batch.shape[0], self.class_count):
            raise ExternalModelError(
                f"logits shape {logits.shape} does not match "
                f"(N={batch.shape[0]}, K={self.class_count})"
            )
        tap_arrays = {}
        for name, payload in (reply.get("taps") or {}).items():
            try:
                tap_arrays[name] = _decode_f32(payload["data"], payload["shape"])
            except (KeyError, TypeError) as exc:
                raise ExternalModelError(f"malformed tap {name!r}: {exc}") from exc
        return logits, tap_arrays

    def forward(self, batch):
        logits, _ = self._request(batch)
        return logits

    def forward_with_taps(self, batch, layers):
        layers = list(layers)
        if "layer_taps" not in self.capabilities:
            raise ExternalModelError("child did not declare the layer_taps capability")
        unknown = set(layers) - set(self.layer_names)
        if unknown:
            raise ValueError(f"unknown layer(s): {sorted(unknown)}")
        logits, taps = self._request(batch, taps=layers)
        missing = set(layers) - set(taps)
        if missing:
            raise ExternalModelError(f"child omitted requested taps: {sorted(missing)}")
        return logits, taps

    def close(self):
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=5.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass


def external_model(command, timeout: float = DEFAULT_TIMEOUT) -> ExternalModel:
    """Spawn `command` (a list of argv strings) and perform the handshake."""
    return ExternalModel(command, timeout=timeout)
