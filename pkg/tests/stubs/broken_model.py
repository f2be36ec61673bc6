"""Protocol stub: valid hello, then answers every request with garbage."""

import json
import sys

print(
    json.dumps(
        {
            "type": "hello",
            "classes": 2,
            "input_shape": [1, 2, 2],
            "layers": [],
            "capabilities": ["logits"],
        }
    ),
    flush=True,
)
for _ in sys.stdin:
    print("this is not json", flush=True)
