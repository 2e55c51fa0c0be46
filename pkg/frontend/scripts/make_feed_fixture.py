"""Regenerate the gray-plague stream-feed fixture for the console tests.

Run from the frontend directory: python3 scripts/make_feed_fixture.py
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi.testclient import TestClient

from plaguesim.service import create_app


def main() -> None:
    app = create_app()
    with TestClient(app) as client:
        created = client.post("/sessions", json={"scenario": "gray-plague", "seed": 11}).json()
        session = created["session"]
        client.post(f"/sessions/{session}/control", json={"command": "step", "ticks": 60})
        published = app.state.sessions[session].published
    target = Path(__file__).parent.parent / "tests" / "fixtures" / "gray_plague_feed.ndjson"
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8") as fh:
        for message in published:
            fh.write(json.dumps(message, sort_keys=True, separators=(",", ":")) + "\n")
    print(f"wrote {target} ({len(published)} messages)")


if __name__ == "__main__":
    main()
