#!/usr/bin/env python3
# Test double for the subprocess estimator protocol.
# usage: line_estimator.py ok|hang|garbage|quit|wrong-id
import csv
import json
import os
import sys
import time

mode = sys.argv[1] if len(sys.argv) > 1 else "ok"
for line in sys.stdin:
    req = json.loads(line)
    if mode == "quit":
        sys.exit(0)
    if mode == "hang":
        time.sleep(30)
    if mode == "garbage":
        print("not json", flush=True)
        continue
    with open(req["csv_path"], newline="") as f:
        rows = list(csv.reader(f))
    reply = {
        "id": req["id"] + (1 if mode == "wrong-id" else 0),
        "measures": {
            "p1": (len(rows) - 1) / 10.0,
            "p2": len(rows[0]) / 10.0,
            "p3": 1.0 if os.path.exists(req["csv_path"]) else 0.0,
        },
    }
    print(json.dumps(reply), flush=True)
