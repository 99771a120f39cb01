"""HTTP service exposing the dashboard payload and what-if ablation queries.

File-in, serve-out: state is loaded once at startup and requests are pure
reads over that immutable snapshot. What-if estimates run on a bounded
worker pool with a per-request timeout and are cached by spec, so repeated
identical requests return identical bodies.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeoutError
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .config import ExperimentConfig, load_config
from .dashboard import (
    DashboardPayload,
    assemble_dashboard,
    payload_to_dict,
    payload_to_json,
    report_to_dict,
)
from .exceptions import AblationError, BanditLensError, EstimatorError
from .logstore import LogView, ingest_logs
from .policies import PolicySnapshot, load_snapshot
from .value_gain import AblationSpec, value_gain

WHATIF_TIMEOUT_SECONDS = 30.0
WHATIF_WORKERS = 4


class WhatIfSpecBody(BaseModel):
    kind: Literal["identity", "baseline_only", "remove_arm", "remove_context_field"]
    arm_id: str | None = None
    field_name: str | None = None


class WhatIfBody(BaseModel):
    spec: WhatIfSpecBody
    estimator: Literal["ips", "snips", "direct_method", "doubly_robust"] | None = None


class _ServiceState:
    def __init__(
        self,
        config: ExperimentConfig,
        view: LogView,
        policy: PolicySnapshot,
        payload: DashboardPayload,
        whatif_timeout: float,
    ):
        self.config = config
        self.view = view
        self.policy = policy
        self.payload_dict = payload_to_dict(payload)
        self.payload_bytes = payload_to_json(payload).encode()
        self.whatif_timeout = whatif_timeout
        self.pool = ThreadPoolExecutor(max_workers=WHATIF_WORKERS)
        self.cache: dict[tuple, dict] = {}
        self.cache_lock = threading.Lock()


def _validate_spec(body: WhatIfBody, state: _ServiceState) -> AblationSpec:
    spec_body = body.spec
    try:
        spec = AblationSpec(
            kind=spec_body.kind,
            arm_id=spec_body.arm_id,
            field_name=spec_body.field_name,
            estimator=body.estimator,
        )
        spec.validate_against(state.view)
    except AblationError as e:
        raise HTTPException(status_code=422, detail=str(e)) from None
    return spec


def create_app(
    config_path: str | Path,
    log_path: str | Path,
    snapshot_path: str | Path,
    whatif_timeout: float = WHATIF_TIMEOUT_SECONDS,
    cors_origins: tuple[str, ...] = ("*",),
) -> FastAPI:
    config = load_config(config_path)
    store = ingest_logs(log_path, config)
    view = store.snapshot()
    if view.n == 0:
        raise BanditLensError("empty log")
    policy = load_snapshot(snapshot_path, config)
    payload = assemble_dashboard(view, policy, config)
    state = _ServiceState(config, view, policy, payload, whatif_timeout)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        state.pool.shutdown(wait=False)

    app = FastAPI(title="bandit-lens", version="0.1.0", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["GET", "POST", "OPTIONS"],
        allow_headers=["*"],
    )
    app.state.lens = state

    def _check_experiment(experiment_id: str) -> None:
        if experiment_id != state.config.experiment_id:
            raise HTTPException(
                status_code=404, detail=f"unknown experiment '{experiment_id}'"
            )

    @app.get("/healthz")
    def healthz() -> Response:
        return Response(content="ok", media_type="text/plain")

    @app.get("/api/v1/experiments/{experiment_id}/dashboard")
    def dashboard(experiment_id: str) -> Response:
        _check_experiment(experiment_id)
        # Serve the exact bytes the report command writes.
        return Response(content=state.payload_bytes, media_type="application/json")

    @app.get("/api/v1/experiments/{experiment_id}/summary")
    def summary(experiment_id: str) -> dict:
        _check_experiment(experiment_id)
        return state.payload_dict["top_level"]

    @app.get("/api/v1/experiments/{experiment_id}/variants")
    def variants(experiment_id: str) -> list:
        _check_experiment(experiment_id)
        return state.payload_dict["variant_rows"]

    @app.get("/api/v1/experiments/{experiment_id}/radar")
    def radar(experiment_id: str) -> list:
        _check_experiment(experiment_id)
        return state.payload_dict["radar"]

    @app.get("/api/v1/experiments/{experiment_id}/context-bars")
    def bars(experiment_id: str) -> list:
        _check_experiment(experiment_id)
        return state.payload_dict["context_bars"]

    @app.post("/api/v1/experiments/{experiment_id}/whatif")
    def whatif(experiment_id: str, body: WhatIfBody) -> dict:
        _check_experiment(experiment_id)
        spec = _validate_spec(body, state)
        key = (spec.kind, spec.arm_id, spec.field_name, spec.estimator)
        with state.cache_lock:
            cached = state.cache.get(key)
        if cached is not None:
            return cached

        future = state.pool.submit(
            value_gain, state.view, state.policy, spec, state.config.estimator
        )
        try:
            report = future.result(timeout=state.whatif_timeout)
        except FutureTimeoutError:
            future.cancel()
            raise HTTPException(
                status_code=500,
                detail={"error_code": "estimator_timeout"},
            ) from None
        except (EstimatorError, AblationError) as e:
            raise HTTPException(
                status_code=500,
                detail={"error_code": "estimator_failure", "message": str(e)},
            ) from None

        result = report_to_dict(report)
        with state.cache_lock:
            state.cache[key] = result
        return result

    return app
