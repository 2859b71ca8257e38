"""Record service responses for the explorer's contract tests.

Boots the real HTTP service in a subprocess, replays the theme-park
walkthrough against it, and freezes every request/response pair into
``tests/fixtures/walkthrough.json``.  The UI tests assert that whatever
the explorer renders equals these recorded values byte-for-byte, so the
frontend can never drift into computing reasoning results locally.

Run from the repository root, with the Python package installed:

    python3 frontend/tests/record_fixtures.py
"""

from __future__ import annotations

import json
import pathlib
import subprocess
import sys
import tempfile
import time
import urllib.error
import urllib.request

PORT = 7917
BASE = f"http://127.0.0.1:{PORT}"
OUT = pathlib.Path(__file__).parent / "fixtures" / "walkthrough.json"

UNIT_0 = "discovery_cove;epcot"
UNIT_1 = "discovery_cove;epcot;prater"


def call(method: str, path: str, payload=None):
    data = None if payload is None else json.dumps(payload).encode()
    req = urllib.request.Request(
        BASE + path,
        data=data,
        method=method,
        headers={"content-type": "application/json"},
    )
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            ["nexus", "fixture", "themepark", "--out-dir", tmp],
            check=True,
            capture_output=True,
        )
        facts = (pathlib.Path(tmp) / "themepark_facts.txt").read_text()
        rules = (pathlib.Path(tmp) / "themepark_rules.txt").read_text()

    server = subprocess.Popen(
        ["nexus", "serve", "--port", str(PORT)],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    try:
        for _ in range(100):
            try:
                call("GET", "/")
                break
            except urllib.error.URLError:
                time.sleep(0.1)
        else:
            raise RuntimeError("service did not come up")

        recorded: dict[str, dict] = {}

        def record(name: str, method: str, path: str, payload=None):
            status, body = call(method, path, payload)
            entry = {"method": method, "path": path, "status": status,
                     "response": body}
            if payload is not None:
                entry["request"] = payload
            recorded[name] = entry
            return body

        record("root", "GET", "/")
        session = record("session", "POST", "/sessions",
                         {"facts": facts, "rules": rules})
        sid = session["session_id"]
        record("session_get", "GET", f"/sessions/{sid}")
        record("core_u0", "POST", f"/sessions/{sid}/core", {"unit": UNIT_0})
        record("compare_gardaland_leolandia", "POST",
               f"/sessions/{sid}/compare",
               {"unit": UNIT_0, "tau": "gardaland", "tau_prime": "leolandia"})
        record("compare_prater_leolandia", "POST",
               f"/sessions/{sid}/compare",
               {"unit": UNIT_0, "tau": "prater", "tau_prime": "leolandia"})
        record("compare_pacific_gardaland", "POST",
               f"/sessions/{sid}/compare",
               {"unit": UNIT_0, "tau": "pacific_park",
                "tau_prime": "gardaland"})
        record("ess_u0", "POST", f"/sessions/{sid}/ess", {"unit": UNIT_0})
        record("ess_u0_pacific_park", "POST", f"/sessions/{sid}/ess",
               {"unit": UNIT_0, "tuple": "pacific_park"})
        record("core_u1", "POST", f"/sessions/{sid}/core", {"unit": UNIT_1})
        record("ess_u1", "POST", f"/sessions/{sid}/ess", {"unit": UNIT_1})
        record("ess_u1_leolandia", "POST", f"/sessions/{sid}/ess",
               {"unit": UNIT_1, "tuple": "leolandia"})
        record("graph_u0", "POST", f"/sessions/{sid}/graph",
               {"unit": UNIT_0})
        record("graph_cap_notice", "POST", f"/sessions/{sid}/graph",
               {"unit": UNIT_0, "tuple_cap": 1})
        record("parse_error", "POST", "/sessions",
               {"facts": "isa(a b).\n"})

        OUT.write_text(json.dumps(recorded, indent=2, sort_keys=True) + "\n")
        print(f"wrote {OUT} ({len(recorded)} entries)")
    finally:
        server.terminate()
        server.wait(timeout=10)


if __name__ == "__main__":
    sys.exit(main())
