"""Record a live session into a JSON fixture for the console tests.

Builds small twins deterministically, drives one interactive session through
the real HTTP service, and captures every payload the console consumes: the
event stream, state snapshots at the pause and at completion, the
recommendation, the decision outcome (plus an idempotent replay), and the
discrepancy reports. The engine transcript for the identical configuration is
recorded alongside for the parity test.

Usage: python scripts/record_fixture.py [out.json]
"""

import json
import sys
import time
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from plantloop.diagnosis import train_dtd
from plantloop.neural import TrainConfig
from plantloop.prognosis import train_dtp
from plantloop.scenario import IssueSpaceSpec, ParamRule, generate_database, split_database
from plantloop.server import create_app
from plantloop.session import run_workflow
from plantloop.config import session_config

TAU0 = 636.57

SESSION_DOC = {
    "session": {
        "malfunction": {"magnitude_pct": 50.0},
        "tau2_grid": {"lo": TAU0, "hi": 1.5 * TAU0, "count": 4},
        "t_trip_grid": {"lo": 25.0, "hi": 95.0, "count": 3},
    }
}


def build_models():
    spec = IssueSpaceSpec(
        malfunction_magnitude=ParamRule.grid(0, 98, 4),
        mitigation_magnitude=ParamRule.grid(100, 150, 4),
        mitigation_start=ParamRule.grid(50, 100, 2),
        mitigation_end_offset=50.0)
    db = generate_database(spec, seed=1)
    splits = split_database(db, seed=0)
    dtd = train_dtd(db, TrainConfig(sequence_length=5, batch_size=100,
                                    learning_rate=0.02, epochs_max=15,
                                    validation_patience=6, early_stop_patience=10,
                                    seed=0),
                    variant="rnn", hidden_size=16, window_stride=6, splits=splits)
    dtp = train_dtp(db, TrainConfig(sequence_length=14, batch_size=256,
                                    learning_rate=0.003, epochs_max=45,
                                    validation_patience=10, early_stop_patience=18,
                                    seed=0),
                    hidden_size=24, window_stride=6, splits=splits)
    return dtd, dtp


def wait_phase(client, sid, phases, timeout=120.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        state = client.get(f"/sessions/{sid}/state").json()
        if state["phase"] in phases or state["finished"]:
            return state
        time.sleep(0.02)
    raise TimeoutError(phases)


def collect_events(client, sid):
    events = []
    with client.stream("GET", f"/sessions/{sid}/events") as resp:
        ev_id, kind = None, None
        for line in resp.iter_lines():
            if line.startswith("id: "):
                ev_id = int(line.split(": ", 1)[1])
            elif line.startswith("event: "):
                kind = line.split(": ", 1)[1]
            elif line.startswith("data: "):
                events.append({"id": ev_id, "event": kind,
                               "data": json.loads(line.split(": ", 1)[1])})
    return events


def main(out_path: str) -> None:
    dtd, dtp = build_models()
    app = create_app(dtd, dtp)
    fixture = {}
    with TestClient(app) as client:
        sid = client.post("/sessions", json={
            "config": SESSION_DOC, "mode": "interactive"}).json()["session_id"]
        awaiting = wait_phase(client, sid, ["AwaitingDecision"])
        fixture["state_awaiting"] = awaiting
        fixture["recommendation"] = client.get(
            f"/sessions/{sid}/recommendation").json()
        body = {"action": "accept", "request_id": "fixture-accept"}
        fixture["decision_outcome"] = client.post(
            f"/sessions/{sid}/decision", json=body).json()
        fixture["decision_replay"] = client.post(
            f"/sessions/{sid}/decision", json=body).json()
        final = wait_phase(client, sid, ["Completed", "Scrammed"])
        fixture["state_final"] = final
        fixture["discrepancy_final"] = client.get(
            f"/sessions/{sid}/discrepancy").json()
        fixture["events"] = collect_events(client, sid)

    cfg = session_config(SESSION_DOC)
    engine = run_workflow(cfg, dtd, dtp)
    fixture["engine_transcript"] = {
        "final_phase": engine.phase.value,
        "chosen_index": engine.recommendation.chosen.index,
        "ranked_order": [e.index for e in engine.recommendation.ranked],
        "ranked_totals": [e.breakdown.total for e in engine.recommendation.ranked],
        "phase_sequence": [e["message"].split(" -> ")[1]
                           for e in engine.events
                           if e["message"].startswith("phase ")],
        "reports": [{"t_ck": r.t_ck, "zeta_power": r.zeta_power,
                     "zeta_pfcl": r.zeta_pfcl, "verdict": r.verdict}
                    for r in engine.discrepancy_reports],
        "max_pfcl": engine.realized_max_pfcl,
    }
    Path(out_path).write_text(json.dumps(fixture, indent=1))
    n_events = len(fixture["events"])
    print(f"wrote {out_path}: {n_events} events, "
          f"{len(fixture['recommendation']['ranked'])} ranked candidates, "
          f"final phase {fixture['engine_transcript']['final_phase']}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "fixtures/session_fixture.json")
