"""Control service: drive a running simulation over HTTP and a socket stream.

One session wraps one simulation.  The loop is the sole mutator of run
state; request handlers either enqueue commands (interventions apply at the
next tick boundary, never retroactively) or read published snapshots, so
any number of spectators can watch without perturbing determinism.

Endpoints:
    POST /sessions                    create a session (paused at tick 0)
    GET  /sessions/{id}               session status
    POST /sessions/{id}/control      step / play / pause / intervene
    GET  /sessions/{id}/snapshot     latest published snapshot message
    GET  /sessions/{id}/avatars      paged per-avatar detail (?zone=...)
    GET  /sessions/{id}/events       full NDJSON event log
    WS   /sessions/{id}/stream       snapshot feed, current snapshot first

Message schemas are documented in docs/protocol.md.
"""

from __future__ import annotations

import asyncio
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, HTTPException, Query, WebSocket, WebSocketDisconnect
from fastapi.responses import PlainTextResponse

from plaguesim import events as ev_mod
from plaguesim.engine import Simulation
from plaguesim.intervention import InterventionError, intervention_from_dict
from plaguesim.metrics import estimate_r0
from plaguesim.scenario import ScenarioError, load_scenario, scenario_from_dict

_NOTABLE_TYPES = ("death", "mutation", "pet_resummon", "intervention_rejected")


@dataclass
class Session:
    id: str
    scenario_name: str
    sim: Simulation
    mode: str = "paused"  # paused | playing
    ticks_per_second: float = 1.0
    lock: threading.Lock = field(default_factory=threading.Lock)
    published: list[dict] = field(default_factory=list)
    _event_cursor: int = 0
    _zones_seen: set[str] = field(default_factory=set)
    _player: Optional[threading.Thread] = None

    def publish_current(self) -> None:
        """Publish a snapshot message for the simulation's latest tick."""
        events = self.sim.events[self._event_cursor:]
        self._event_cursor = len(self.sim.events)
        applied = [e for e in events if e["type"] == "intervention_applied"]
        notable = []
        for e in events:
            if e["type"] in _NOTABLE_TYPES:
                notable.append(e)
            elif e["type"] == "infect" and e["zone"] not in self._zones_seen:
                self._zones_seen.add(e["zone"])
                notable.append({**e, "first_case_in_zone": True})
        snap = self.sim.snapshots[-1]
        estimate = estimate_r0(self.sim.tree)
        self.published.append(
            {
                "type": "snapshot",
                "session": self.id,
                "tick": snap.tick,
                "mode": self.mode,
                "finished": self.sim.finished,
                "snapshot": snap.to_dict(),
                "r0": {
                    "first_generation": estimate.first_generation,
                    "weighted": estimate.weighted_all,
                },
                "applied_interventions": applied,
                "notable_events": notable,
            }
        )

    def step_locked(self, n: int) -> int:
        """Advance up to n ticks under the session lock; returns ticks done."""
        done = 0
        with self.lock:
            for _ in range(n):
                if self.sim.step() is None:
                    break
                self.publish_current()
                done += 1
        return done

    def start_playing(self, rate: float) -> None:
        self.ticks_per_second = max(0.1, rate)
        if self.mode == "playing":
            return
        self.mode = "playing"

        def loop() -> None:
            while self.mode == "playing" and not self.sim.finished:
                start = time.monotonic()
                if self.step_locked(1) == 0:
                    break
                delay = 1.0 / self.ticks_per_second - (time.monotonic() - start)
                if delay > 0:
                    time.sleep(delay)
            if self.mode == "playing":
                self.mode = "paused"

        self._player = threading.Thread(target=loop, daemon=True)
        self._player.start()

    def pause(self) -> None:
        self.mode = "paused"
        player = self._player
        if player is not None and player.is_alive():
            player.join(timeout=5.0)
        self._player = None

    def status(self) -> dict:
        return {
            "session": self.id,
            "scenario": self.scenario_name,
            "tick": self.sim.tick,
            "mode": self.mode,
            "finished": self.sim.finished,
            "ticks_per_second": self.ticks_per_second,
        }


def create_app() -> FastAPI:
    app = FastAPI(title="plaguesim control service")
    sessions: dict[str, Session] = {}
    app.state.sessions = sessions

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    @app.post("/sessions", status_code=201)
    def create_session(body: dict) -> dict:
        scenario = body.get("scenario")
        if scenario is None:
            raise HTTPException(status_code=422, detail="missing 'scenario' (name, path, or inline object)")
        try:
            if isinstance(scenario, dict):
                config = scenario_from_dict(scenario)
            else:
                config = load_scenario(str(scenario))
        except ScenarioError as exc:
            raise HTTPException(status_code=422, detail=f"invalid scenario: {exc}")
        seed = body.get("seed")
        session = Session(
            id=uuid.uuid4().hex[:12],
            scenario_name=config.name,
            sim=Simulation(config, seed=seed, collect_events=True),
        )
        session.publish_current()
        sessions[session.id] = session
        return {"session": session.id, **session.published[-1]}

    @app.get("/sessions/{session_id}")
    def session_status(session_id: str) -> dict:
        return get_session(session_id).status()

    @app.post("/sessions/{session_id}/control")
    def control(session_id: str, body: dict) -> dict:
        session = get_session(session_id)
        command = body.get("command")
        if command == "step":
            ticks = int(body.get("ticks", 1))
            if ticks < 1:
                raise HTTPException(status_code=422, detail="ticks must be >= 1")
            session.pause()
            done = session.step_locked(ticks)
            return {"ok": True, "command": "step", "ticks_done": done, **session.status()}
        if command == "play":
            rate = float(body.get("ticks_per_second", 2.0))
            session.start_playing(rate)
            return {"ok": True, "command": "play", **session.status()}
        if command == "pause":
            session.pause()
            return {"ok": True, "command": "pause", **session.status()}
        if command == "intervene":
            data = body.get("intervention")
            try:
                iv = intervention_from_dict(data or {})
                session.sim.submit_intervention(iv)
            except InterventionError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            return {"ok": True, "command": "intervene", "applies_at_tick": session.sim.tick + 1}
        raise HTTPException(status_code=422, detail=f"unknown command {command!r}")

    @app.get("/sessions/{session_id}/snapshot")
    def latest_snapshot(session_id: str) -> dict:
        return get_session(session_id).published[-1]

    @app.get("/sessions/{session_id}/avatars")
    def avatars(
        session_id: str,
        zone: Optional[str] = Query(default=None),
        offset: int = Query(default=0, ge=0),
        limit: int = Query(default=100, ge=1, le=1000),
    ) -> dict:
        session = get_session(session_id)
        with session.lock:
            rows = []
            for a in session.sim.population.avatars:
                if zone is not None and a.zone != zone:
                    continue
                rows.append(
                    {
                        "id": a.id,
                        "zone": a.zone,
                        "vocation": a.vocation,
                        "level": a.level,
                        "alive": a.alive,
                        "infected": a.infection is not None,
                        "stage": a.infection.stage_index if a.infection else None,
                        "immune": a.immune,
                        "awareness": a.awareness.kind,
                        "masked": a.masked,
                        "pets": list(a.pets),
                    }
                )
        total = len(rows)
        return {"total": total, "offset": offset, "avatars": rows[offset : offset + limit]}

    @app.get("/sessions/{session_id}/events", response_class=PlainTextResponse)
    def event_log(session_id: str) -> str:
        session = get_session(session_id)
        with session.lock:
            return ev_mod.dumps(session.sim.events)

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str) -> None:
        session = sessions.get(session_id)
        await websocket.accept()
        if session is None:
            await websocket.close(code=4404, reason=f"unknown session {session_id!r}")
            return
        # Late subscribers start from the current snapshot, then follow along.
        cursor = max(0, len(session.published) - 1)
        try:
            while True:
                while cursor < len(session.published):
                    await websocket.send_json(session.published[cursor])
                    cursor += 1
                if session.sim.finished and cursor >= len(session.published):
                    await websocket.send_json({"type": "finished", "session": session.id, "tick": session.sim.tick})
                    break
                await asyncio.sleep(0.02)
        except WebSocketDisconnect:
            return
        await websocket.close()

    return app
