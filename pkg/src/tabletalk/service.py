"""HTTP service exposing scenes and dialogue sessions.

Each user turn is one request; responses embed any pending question.  The
ground-truth endpoint is separate from the perceived-scene endpoint so a
client can toggle views without ground truth leaking into grounding.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .dialogue import Outcome, WrongStateError
from .fuzzy import build_graph, graph_dump
from .perception import detect
from .scene import scene_to_dict
from .store import SceneLibrary, SessionStore


class CreateSessionBody(BaseModel):
    scene_id: str


class TurnBody(BaseModel):
    text: str


def outcome_to_response(outcome: Outcome) -> dict:
    body: dict = {"status": outcome.status}
    if outcome.case is not None:
        body["case"] = outcome.case
    if outcome.target is not None:
        body["target"] = outcome.target
    if outcome.question is not None:
        body["question"] = outcome.question.text
        body["options"] = outcome.question.option_labels()
    if outcome.reason is not None:
        body["reason"] = outcome.reason
    return body


def build_app(library: SceneLibrary) -> FastAPI:
    app = FastAPI(title="tabletalk")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore()

    def require_session(session_id: str) -> None:
        if session_id not in store:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")

    @app.get("/scenes")
    def list_scenes() -> list[str]:
        return library.ids()

    @app.get("/scenes/{scene_id}")
    def get_scene(scene_id: str) -> dict:
        if scene_id not in library:
            raise HTTPException(status_code=404, detail=f"unknown scene {scene_id!r}")
        return scene_to_dict(library.get(scene_id))

    @app.post("/sessions")
    def create_session(body: CreateSessionBody) -> dict:
        if body.scene_id not in library:
            raise HTTPException(status_code=404, detail=f"unknown scene {body.scene_id!r}")
        return {"session_id": store.create(library.get(body.scene_id))}

    @app.post("/sessions/{session_id}/utterance")
    def post_utterance(session_id: str, body: TurnBody) -> dict:
        require_session(session_id)
        with store.locked(session_id) as session:
            try:
                outcome = session.handle_utterance(body.text)
            except WrongStateError as err:
                raise HTTPException(status_code=409, detail=str(err)) from err
        return outcome_to_response(outcome)

    @app.post("/sessions/{session_id}/answer")
    def post_answer(session_id: str, body: TurnBody) -> dict:
        require_session(session_id)
        with store.locked(session_id) as session:
            try:
                outcome = session.handle_answer(body.text)
            except WrongStateError as err:
                raise HTTPException(status_code=409, detail=str(err)) from err
        return outcome_to_response(outcome)

    @app.get("/sessions/{session_id}/perceived")
    def get_perceived(session_id: str) -> dict:
        require_session(session_id)
        with store.locked(session_id) as session:
            graph = session.graph
            if graph is None:
                # No utterance yet: report what the detector would currently see
                # without touching session state.
                percepts = detect(session.scene, session.viewpoint, session.detector)
                graph = build_graph(percepts, session.viewpoint, session.scene.table_bounds)
            dump = graph_dump(graph)
            return {
                "viewpoint": {
                    "azimuth_deg": session.viewpoint.azimuth_deg,
                    "distance_m": session.viewpoint.distance_m,
                    "height_m": session.viewpoint.height_m,
                },
                "percepts": dump["nodes"],
                "graph": dump,
                "candidates": list(session.candidate_ids),
                "target": session.candidate_ids[0]
                if session.state.value == "resolved" and session.candidate_ids
                else None,
            }

    @app.get("/sessions/{session_id}/transcript")
    def get_transcript(session_id: str) -> dict:
        require_session(session_id)
        with store.locked(session_id) as session:
            return session.transcript()

    return app


def serve(port: int, scene_dir: str, host: str = "127.0.0.1") -> None:
    """Run the service until interrupted; fails fast on invalid scene files."""
    import uvicorn

    library = SceneLibrary(scene_dir)
    uvicorn.run(build_app(library), host=host, port=port)
