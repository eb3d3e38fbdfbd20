"""Thin client for the tubekit service.

The CLI (and anything else) talks to the service through this class.  With a
server URL it goes over HTTP; without one it drives the ASGI app in-process,
so the CLI works standalone while exercising the exact same request path.
"""

from __future__ import annotations

import httpx


class ServiceError(Exception):
    """A request the service rejected, with its stable machine code."""

    def __init__(self, code: str, message: str, status: int):
        super().__init__(message)
        self.code = code
        self.status = status


class ServiceClient:
    def __init__(self, server: str | None = None, timeout: float = 600.0):
        if server is None:
            import warnings

            with warnings.catch_warnings():
                # starlette's httpx-backed TestClient still works; keep CLI stderr clean
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import app

            self._client = TestClient(app)
        else:
            self._client = httpx.Client(base_url=server, timeout=timeout)

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "ServiceClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _finish(self, response: httpx.Response) -> dict:
        if response.status_code >= 400:
            try:
                err = response.json().get("error", {})
            except ValueError:
                err = {}
            raise ServiceError(
                err.get("code", "http_error"),
                err.get("message", f"HTTP {response.status_code}"),
                response.status_code,
            )
        return response.json()

    def get(self, path: str) -> dict:
        return self._finish(self._client.get(path))

    def post(self, path: str, payload: dict) -> dict:
        return self._finish(self._client.post(path, json=payload))
