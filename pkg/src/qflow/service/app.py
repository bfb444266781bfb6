"""FastAPI service wrapping the scenario runner.

The service is stateless: each POST /run/{subcommand} carries its own
config (inline text or a catalog name) and the response returns every
produced file as content, so clients need no shared filesystem. Runner
outcomes, including config and numerical failures, come back as a normal
response with the CLI exit code in the payload; transport-level errors
(unknown subcommand, malformed body) use plain HTTP status codes.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import (
    CATALOG_NAMES,
    ScenarioConfig,
    catalog_config_text,
    load_config_text,
)
from ..errors import ConfigError, QFlowError
from ..runner import SUBCOMMANDS, run_subcommand
from .models import (
    CatalogEntry,
    CatalogListing,
    ErrorInfo,
    FilePayload,
    Health,
    RunRequest,
    RunResponse,
)

app = FastAPI(title="qflow", version=__version__)


def _resolve_config(request: RunRequest, subcommand: str) -> ScenarioConfig | None:
    if request.config_text is not None and request.scenario is not None:
        raise ConfigError("provide either config_text or scenario, not both")
    if request.config_text is not None:
        cfg = load_config_text(request.config_text)
    elif request.scenario is not None:
        cfg = load_config_text(catalog_config_text(request.scenario))
    elif subcommand == "verify":
        cfg = None
    else:
        raise ConfigError(f"subcommand '{subcommand}' needs config_text or scenario")
    if cfg is not None and (request.seed is not None or request.tolerance_scale is not None):
        cfg = cfg.with_overrides(seed=request.seed, tolerance_scale=request.tolerance_scale)
    return cfg


@app.get("/health", response_model=Health)
def health() -> Health:
    return Health(status="ok", version=__version__)


@app.get("/catalog", response_model=CatalogListing)
def catalog() -> CatalogListing:
    return CatalogListing(scenarios=list(CATALOG_NAMES))


@app.get("/catalog/{name}", response_model=CatalogEntry)
def catalog_entry(name: str) -> CatalogEntry:
    try:
        return CatalogEntry(name=name, config_text=catalog_config_text(name))
    except ConfigError as exc:
        raise HTTPException(status_code=404, detail=str(exc)) from exc


@app.post("/run/{subcommand}", response_model=RunResponse)
def run(subcommand: str, request: RunRequest) -> RunResponse:
    if subcommand not in SUBCOMMANDS:
        raise HTTPException(
            status_code=404,
            detail=f"unknown subcommand '{subcommand}' (have: {', '.join(SUBCOMMANDS)})",
        )
    try:
        config = _resolve_config(request, subcommand)
        result = run_subcommand(subcommand, config)
    except ConfigError as exc:
        return RunResponse(
            subcommand=subcommand,
            status="config_error",
            exit_code=2,
            error=ErrorInfo(kind="config", message=str(exc)),
        )
    except QFlowError as exc:
        return RunResponse(
            subcommand=subcommand,
            status="numerical_error",
            exit_code=3,
            error=ErrorInfo(kind=type(exc).__name__, message=str(exc)),
        )
    return RunResponse(
        subcommand=result.subcommand,
        status=result.status,
        exit_code=result.exit_code,
        summary=result.summary,
        files=[FilePayload(name=n, content=c) for n, c in result.files],
    )
