"""Protocol stub: echoes the request payload back through an "input" tap
and reports per-image checksums as logits."""

import base64
import json
import struct
import sys


def main():
    hello = {
        "type": "hello",
        "classes": 2,
        "input_shape": [3, 4, 4],
        "layers": ["input", "logits"],
        "capabilities": ["logits", "layer_taps"],
    }
    print(json.dumps(hello), flush=True)
    for line in sys.stdin:
        msg = json.loads(line)
        shape = msg["shape"]
        raw = base64.b64decode(msg["data"])
        count = len(raw) // 4
        values = struct.unpack(f"<{count}f", raw)
        per_image = count // shape[0]
        logits = []
        for i in range(shape[0]):
            chunk = values[i * per_image : (i + 1) * per_image]
            logits.append([float(sum(chunk)), 0.0])
        reply = {"type": "result", "id": msg["id"], "logits": logits}
        if msg.get("taps"):
            reply["taps"] = {
                name: {"shape": shape, "data": msg["data"]} for name in msg["taps"]
            }
        print(json.dumps(reply), flush=True)


if __name__ == "__main__":
    main()
