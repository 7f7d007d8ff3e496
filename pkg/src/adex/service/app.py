"""FastAPI app: REST endpoints for graph fixtures plus the session channel.

One WebSocket connection hosts one session. The server drives the cycle:
it emits an agent_turn, waits up to the feedback window for user_feedback
(timeout counts as no feedback), and emits a pm_snapshot after every cycle.
A pause message freezes the remaining window until resume or substantive
feedback arrives.
"""

from __future__ import annotations

import asyncio
import dataclasses
import logging
import time
import uuid
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from pydantic import TypeAdapter, ValidationError

from ..config import load_engine_setup, resolve_graph
from ..engine import RawFeedback, new_session, step
from ..graph import KnowledgeGraph
from ..planning import EngineConfig
from .schemas import (AgentTurnMsg, AgentTurnPayload, ClientMessage, ErrorMsg,
                      ErrorPayload, GraphSummary, PmSnapshotMsg,
                      PmSnapshotPayload, SessionEndMsg, SessionEndPayload,
                      SessionStartMsg, TripleInfo, UserFeedbackMsg)

log = logging.getLogger(__name__)

DEFAULT_FEEDBACK_WINDOW = 8.0

_client_adapter: TypeAdapter = TypeAdapter(ClientMessage)


def _apply_engine_overrides(cfg: EngineConfig, overrides: dict) -> EngineConfig:
    valid = {f.name for f in dataclasses.fields(EngineConfig)}
    unknown = set(overrides) - valid
    if unknown:
        raise ValueError(f"unknown engine override(s): {', '.join(sorted(unknown))}")
    return dataclasses.replace(cfg, **overrides).validate()


class SessionChannel:
    """Drives one session over one WebSocket connection."""

    def __init__(self, ws: WebSocket, graph: KnowledgeGraph,
                 cfg: EngineConfig, params, start: SessionStartMsg):
        overrides = dict(start.config or {})
        self.window = float(overrides.pop("feedback_window",
                                          DEFAULT_FEEDBACK_WINDOW))
        seed = int(overrides.pop("seed", 0))
        engine_overrides = overrides.pop("engine", {})
        if overrides:
            raise ValueError(
                f"unknown config override(s): {', '.join(sorted(overrides))}")
        if engine_overrides:
            cfg = _apply_engine_overrides(cfg, engine_overrides)
        self.ws = ws
        self.session = new_session(graph, cfg, params, seed=seed)
        self.session_id = uuid.uuid4().hex
        self.inbox: asyncio.Queue = asyncio.Queue()
        self.closed = False

    async def send(self, model) -> None:
        await self.ws.send_text(model.model_dump_json())

    async def run(self) -> None:
        reader = asyncio.create_task(self._read_loop())
        try:
            feedback = RawFeedback(kind="none")
            while True:
                turn = await asyncio.to_thread(step, self.session, feedback)
                if turn.utterances:
                    first = turn.plans[0]
                    await self.send(AgentTurnMsg(
                        session_id=self.session_id,
                        payload=AgentTurnPayload(
                            texts=turn.utterances,
                            action=first.action,
                            move="+".join(p.move for p in turn.plans),
                            targets=[t for p in turn.plans for t in p.targets],
                            cycle=turn.cycle)))
                pm = turn.pm
                await self.send(PmSnapshotMsg(
                    session_id=self.session_id,
                    payload=PmSnapshotPayload(
                        e=pm["expertise"], l=pm["load"],
                        a=pm["attentiveness"], c=pm["cooperativeness"])))
                if turn.done:
                    await self.send(SessionEndMsg(
                        session_id=self.session_id,
                        payload=SessionEndPayload(
                            done=True, length=self.session.agent_turns)))
                    break
                feedback = await self._collect_feedback()
                if feedback is None:
                    break
        except WebSocketDisconnect:
            pass
        finally:
            reader.cancel()

    async def _read_loop(self) -> None:
        try:
            while True:
                raw = await self.ws.receive_text()
                try:
                    msg = _client_adapter.validate_json(raw)
                except ValidationError as exc:
                    await self.send(ErrorMsg(session_id=self.session_id,
                                             payload=ErrorPayload(
                                                 message=f"malformed message: {exc.errors()[0]['msg']}")))
                    continue
                if isinstance(msg, SessionStartMsg):
                    await self.send(ErrorMsg(session_id=self.session_id,
                                             payload=ErrorPayload(
                                                 message="session already started")))
                    continue
                if msg.session_id != self.session_id:
                    await self.send(ErrorMsg(session_id=msg.session_id,
                                             payload=ErrorPayload(
                                                 message="unknown session_id")))
                    await self.ws.close()
                    self.closed = True
                    await self.inbox.put(None)
                    return
                await self.inbox.put(msg)
        except WebSocketDisconnect:
            await self.inbox.put(None)
        except RuntimeError:
            await self.inbox.put(None)

    async def _collect_feedback(self) -> Optional[RawFeedback]:
        """Waits for user feedback, honoring pause/resume and the window."""
        remaining = self.window
        paused = False
        while True:
            try:
                if paused:
                    msg = await self.inbox.get()
                else:
                    started = time.monotonic()
                    msg = await asyncio.wait_for(self.inbox.get(),
                                                 timeout=remaining)
                    remaining = max(0.0, remaining - (time.monotonic() - started))
            except asyncio.TimeoutError:
                return RawFeedback(kind="none")
            if msg is None:
                return None
            if msg.type == "pause":
                paused = True
            elif msg.type == "resume":
                paused = False
                if remaining <= 0.0:
                    return RawFeedback(kind="none")
            elif msg.type == "user_feedback":
                try:
                    fb = RawFeedback(
                        kind=msg.kind, question_type=msg.question_type,
                        target_triple=msg.target_triple, polarity=msg.polarity,
                        typing_time_per_char=msg.typing_time_per_char,
                        deletions=msg.deletions, free_text=msg.free_text)
                    if fb.kind == "substantive":
                        self.session.graph.require(fb.target_triple)
                except (ValueError, KeyError) as exc:
                    await self.send(ErrorMsg(session_id=self.session_id,
                                             payload=ErrorPayload(message=str(exc))))
                    if not paused and remaining <= 0.0:
                        return RawFeedback(kind="none")
                    continue
                return fb


def create_app(graph_specs: Optional[list[str]] = None,
               config_path: Optional[Path] = None,
               frontend_dir: Optional[Path] = None) -> FastAPI:
    """Builds the service with the given graph fixtures preloaded."""
    cfg, params = load_engine_setup(config_path)
    graphs: dict[str, KnowledgeGraph] = {}
    for spec in graph_specs or ["quarto"]:
        name = Path(spec).stem
        graphs[name] = resolve_graph(spec)

    app = FastAPI(title="adex session service", version="0.1.0")

    @app.get("/health")
    def health():
        return {"status": "ok", "graphs": sorted(graphs)}

    @app.get("/graphs", response_model=list[GraphSummary])
    def list_graphs():
        return [GraphSummary(id=name, blocks=list(g.blocks),
                             triple_count=len(g.triples))
                for name, g in sorted(graphs.items())]

    @app.get("/graphs/{graph_id}/triples", response_model=list[TripleInfo])
    def graph_triples(graph_id: str):
        g = graphs.get(graph_id)
        if g is None:
            raise HTTPException(status_code=404,
                                detail=f"unknown graph {graph_id!r}")
        out = []
        for tid in sorted(g.triples):
            t = g.triples[tid]
            label = (f"{g.concepts.get(t.subject, t.subject)} "
                     f"{t.predicate.replace('_', ' ')} "
                     f"{g.concepts.get(t.object, t.object)}")
            out.append(TripleInfo(id=t.id, subject=t.subject,
                                  predicate=t.predicate, object=t.object,
                                  block=t.block, complexity=t.complexity,
                                  mandatory=t.mandatory, label=label))
        return out

    @app.websocket("/ws")
    async def session_socket(ws: WebSocket):
        await ws.accept()
        try:
            raw = await ws.receive_text()
        except WebSocketDisconnect:
            return
        try:
            start = SessionStartMsg.model_validate_json(raw)
        except ValidationError:
            await ws.send_text(ErrorMsg(payload=ErrorPayload(
                message="first message must be session_start")).model_dump_json())
            await ws.close()
            return
        graph = graphs.get(start.graph_id)
        if graph is None:
            await ws.send_text(ErrorMsg(payload=ErrorPayload(
                message=f"unknown graph {start.graph_id!r}")).model_dump_json())
            await ws.close()
            return
        try:
            channel = SessionChannel(ws, graph, cfg, params, start)
        except ValueError as exc:
            await ws.send_text(ErrorMsg(payload=ErrorPayload(
                message=str(exc))).model_dump_json())
            await ws.close()
            return
        # The client learns its session_id from the first emitted message.
        await channel.run()

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=frontend_dir, html=True),
                  name="frontend")
    return app
