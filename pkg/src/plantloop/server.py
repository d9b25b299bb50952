"""JSON-over-HTTP session service with a server-sent event stream.

Schema version 1. Endpoints:

  POST /sessions                     create a session; body {"config": {...},
                                     "mode": "interactive"|"auto-accept",
                                     "pacing": sim-seconds-per-wall-second
                                     (0 = unpaced)}
  GET  /sessions/{id}/state          phase, sim time, latest readings, alarm
  GET  /sessions/{id}/recommendation ranked candidates, reward grid, predicted
                                     transients (404 until available)
  POST /sessions/{id}/decision       {"action": "accept"|"override"|"scram",
                                     "candidate_index"?, "request_id"?}
  GET  /sessions/{id}/discrepancy    discrepancy reports so far
  GET  /sessions/{id}/events?since=N server-sent events: per-second state
                                     samples, phase changes, then "end"

Times are seconds of simulation time; temperatures degC, torques N*m,
power W. Decision posts are idempotent: replaying a recorded decision (same
request_id or identical body) returns the recorded outcome instead of 409.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field

from fastapi import Body, FastAPI, HTTPException
from fastapi.responses import StreamingResponse

from .config import session_config
from .diagnosis import DiagnosisModel
from .prognosis import PrognosisModel
from .session import Decision, DecisionSource, Phase, Session, SessionResult

SCHEMA_VERSION = 1


class _QueueDecision(DecisionSource):
    """Blocks the session thread until the API delivers a decision."""

    def __init__(self):
        self.ready = threading.Event()
        self.decision: Decision | None = None

    def decide(self, recommendation) -> Decision:
        self.ready.wait()
        return self.decision


@dataclass
class ManagedSession:
    session: Session
    mode: str
    source: _QueueDecision | None
    thread: threading.Thread | None = None
    events: list = field(default_factory=list)
    cond: threading.Condition = field(default_factory=threading.Condition)
    decision_lock: threading.Lock = field(default_factory=threading.Lock)
    recorded_decision: dict | None = None
    decision_outcome: dict | None = None
    result: SessionResult | None = None
    error: str | None = None
    finished: bool = False

    def emit(self, kind: str, data: dict) -> None:
        with self.cond:
            self.events.append({"id": len(self.events), "event": kind,
                                "data": data})
            self.cond.notify_all()


def _state_payload(m: ManagedSession) -> dict:
    s = m.session
    alarm = any(r.verdict == "Scram" or max(r.zeta_power, r.zeta_pfcl) > r.limit
                for r in s.reports)
    return {
        "schema_version": SCHEMA_VERSION,
        "phase": s.phase.value,
        "sim_time": s.state.time,
        "scrammed": s.state.scrammed,
        "latest": s.latest_observation(),
        "alarm": alarm,
        "finished": m.finished,
        "error": m.error,
        "scram_reason": s.scram_reason,
    }


def _recommendation_payload(s: Session) -> dict:
    rec = s.recommendation
    ranked = [{
        "candidate_index": e.index,
        "tau2_end": e.tau2_end,
        "t_trip": e.t_trip,
        "total_reward": e.breakdown.total,
        "pfcl_reward": e.breakdown.pfcl_reward,
        "power_reward": e.breakdown.power_reward,
        "torque_reward": e.breakdown.torque_reward,
    } for e in rec.ranked]
    grid = rec.reward_grid
    predictions = {}
    for entry in rec.ranked:
        pred = s._predictions[entry.index]
        predictions[str(entry.index)] = {
            "times": pred["times"].tolist(),
            "pfcl_temp": pred["values"]["pfcl_temp"].tolist(),
            "core_power": pred["values"]["core_power"].tolist(),
        }
    return {
        "schema_version": SCHEMA_VERSION,
        "t_rcmd": rec.t_rcmd,
        "ranked": ranked,
        "chosen_index": rec.chosen.index,
        "reward_grid": {
            "tau2_values": list(grid["tau2_values"]),
            "t_trip_values": list(grid["t_trip_values"]),
            "totals": [[None if v != v else v for v in row]
                       for row in grid["totals"]],
        },
        "pfcl_limit": s.config.reward_spec.pfcl_good_hi,
        "predictions": predictions,
    }


def _report_payload(r) -> dict:
    return {"t_ck": r.t_ck, "zeta_power": r.zeta_power, "zeta_pfcl": r.zeta_pfcl,
            "rmse_power": r.rmse_power, "rmse_pfcl": r.rmse_pfcl,
            "limit": r.limit, "verdict": r.verdict}


def create_app(dtd: DiagnosisModel, dtp: PrognosisModel,
               config_defaults: dict | None = None) -> FastAPI:
    app = FastAPI(title="plantloop session service")
    registry: dict[str, ManagedSession] = {}
    defaults = config_defaults or {}

    def get_managed(session_id: str) -> ManagedSession:
        if session_id not in registry:
            raise HTTPException(status_code=404, detail="unknown session")
        return registry[session_id]

    @app.post("/sessions")
    def create_session(payload: dict = Body(default={})) -> dict:
        doc = dict(defaults)
        doc.update(payload.get("config", {}))
        cfg = session_config(doc)
        mode = payload.get("mode", cfg.mode)
        pacing = float(payload.get("pacing", 0.0))
        source = _QueueDecision() if mode == "interactive" else None
        session = Session(cfg, dtd, dtp, decision_source=source)
        m = ManagedSession(session=session, mode=mode, source=source)

        def on_obs(s: Session):
            m.emit("state", {"phase": s.phase.value, **s.latest_observation()})

        def on_phase(s: Session):
            m.emit("phase", {"phase": s.phase.value, "sim_time": s.state.time})

        session.add_observation_listener(on_obs)
        session.add_phase_listener(on_phase)
        if pacing > 0:
            session.pacer = lambda s: time.sleep(1.0 / pacing)

        def run():
            try:
                m.result = session.run()
            except Exception as exc:  # surfaced via /state
                m.error = str(exc)
            finally:
                m.finished = True
                m.emit("end", {"phase": session.phase.value})

        m.thread = threading.Thread(target=run, daemon=True)
        m.thread.start()
        session_id = uuid.uuid4().hex[:12]
        registry[session_id] = m
        return {"schema_version": SCHEMA_VERSION, "session_id": session_id,
                "mode": mode}

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str) -> dict:
        return _state_payload(get_managed(session_id))

    @app.get("/sessions/{session_id}/recommendation")
    def get_recommendation(session_id: str) -> dict:
        m = get_managed(session_id)
        if m.session.recommendation is None:
            raise HTTPException(status_code=404,
                                detail="no recommendation available yet")
        return _recommendation_payload(m.session)

    @app.get("/sessions/{session_id}/discrepancy")
    def get_discrepancy(session_id: str) -> dict:
        m = get_managed(session_id)
        return {"schema_version": SCHEMA_VERSION,
                "reports": [_report_payload(r) for r in m.session.reports]}

    @app.post("/sessions/{session_id}/decision")
    def post_decision(session_id: str, payload: dict = Body(...)) -> dict:
        m = get_managed(session_id)
        action = payload.get("action")
        if action not in ("accept", "override", "scram"):
            raise HTTPException(status_code=400, detail="malformed action")
        idx = payload.get("candidate_index")
        if action == "override":
            known = (m.session.recommendation is not None and any(
                e.index == idx for e in m.session.recommendation.ranked))
            if not known:
                raise HTTPException(status_code=400,
                                    detail="malformed candidate_index")
        key = {"action": action, "candidate_index": idx,
               "request_id": payload.get("request_id")}
        with m.decision_lock:
            if m.recorded_decision is not None:
                same_request = (key.get("request_id") is not None and
                                key["request_id"] == m.recorded_decision.get("request_id"))
                same_body = (key["action"] == m.recorded_decision["action"] and
                             key["candidate_index"] == m.recorded_decision["candidate_index"])
                if same_request or same_body:
                    return m.decision_outcome
                raise HTTPException(status_code=409,
                                    detail="a different decision was already recorded")
            if m.mode != "interactive":
                raise HTTPException(status_code=409,
                                    detail="session does not accept decisions")
            if m.session.phase is not Phase.AWAITING_DECISION:
                raise HTTPException(
                    status_code=409,
                    detail=f"cannot decide in phase {m.session.phase.value}")
            m.recorded_decision = key
            m.source.decision = Decision(action, idx)
            m.source.ready.set()
            deadline = time.time() + 10.0
            while (m.session.phase is Phase.AWAITING_DECISION
                   and time.time() < deadline):
                time.sleep(0.005)
            m.decision_outcome = {
                "schema_version": SCHEMA_VERSION,
                "recorded": key,
                "phase": m.session.phase.value,
            }
            return m.decision_outcome

    @app.get("/sessions/{session_id}/events")
    def get_events(session_id: str, since: int = 0) -> StreamingResponse:
        m = get_managed(session_id)

        def stream():
            cursor = since
            while True:
                with m.cond:
                    while cursor >= len(m.events) and not m.finished:
                        m.cond.wait(timeout=1.0)
                    chunk = m.events[cursor:]
                    cursor = len(m.events)
                for ev in chunk:
                    yield (f"id: {ev['id']}\nevent: {ev['event']}\n"
                           f"data: {json.dumps(ev['data'])}\n\n")
                if m.finished and cursor >= len(m.events):
                    return

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app


def serve_api(dtd_path: str, dtp_path: str, bind: str = "127.0.0.1:8000",
              config_defaults: dict | None = None) -> None:
    """Blocking entry point used by the CLI."""
    import uvicorn

    dtd = DiagnosisModel.load(dtd_path)
    dtp = PrognosisModel.load(dtp_path)
    app = create_app(dtd, dtp, config_defaults)
    host, _, port = bind.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
