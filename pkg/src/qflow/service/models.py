"""Request/response models for the qflow HTTP service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class RunRequest(BaseModel):
    """One scenario run.

    Provide either inline config text or a catalog scenario name; `verify`
    also accepts neither, which runs the whole catalog.
    """

    config_text: Optional[str] = None
    scenario: Optional[str] = None
    seed: Optional[int] = None
    tolerance_scale: Optional[float] = Field(default=None, gt=0)


class FilePayload(BaseModel):
    name: str
    content: str


class ErrorInfo(BaseModel):
    kind: str
    message: str


class RunResponse(BaseModel):
    subcommand: str
    status: str
    exit_code: int
    summary: dict = Field(default_factory=dict)
    files: list[FilePayload] = Field(default_factory=list)
    error: Optional[ErrorInfo] = None


class CatalogEntry(BaseModel):
    name: str
    config_text: str


class CatalogListing(BaseModel):
    scenarios: list[str]


class Health(BaseModel):
    status: str
    version: str
