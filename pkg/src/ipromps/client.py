"""Thin HTTP client for the service.

Talks to a remote server when given a base URL, or drives the ASGI app
in-process otherwise, so the CLI works without a running server while
staying a pure client of the same API.
"""

from __future__ import annotations

from typing import Mapping, Optional

import httpx

from .errors import IPrompsError


class ServiceError(IPrompsError):
    """Non-2xx response from the service, carrying its error payload."""

    def __init__(self, status: int, error: str, message: str):
        super().__init__(message)
        self.status = status
        self.error = error


class ServiceClient:
    def __init__(self, server: str | None = None, app=None, timeout: float | None = None):
        if server:
            self._client = httpx.Client(base_url=server.rstrip("/"), timeout=timeout)
        else:
            from starlette.testclient import TestClient

            from .service import create_app

            self._client = TestClient(app or create_app(), raise_server_exceptions=False)

    def close(self):
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _request(self, method: str, path: str, payload: Optional[dict] = None):
        response = self._client.request(method, path, json=payload)
        if response.status_code >= 400:
            try:
                body = response.json()
                raise ServiceError(
                    response.status_code,
                    body.get("error", "HTTPError"),
                    body.get("message", body.get("detail", response.text)),
                )
            except ValueError:
                raise ServiceError(response.status_code, "HTTPError", response.text) from None
        if response.status_code == 204:
            return {}
        return response.json()

    def health(self) -> dict:
        return self._request("GET", "/health")

    def train(self, files: Mapping[str, str], options: dict, register_as: str | None = None) -> dict:
        payload = {"files": dict(files), "options": options}
        if register_as:
            payload["register_as"] = register_as
        return self._request("POST", "/train", payload)

    def recognize(self, observation_csv: str, *, library: dict | None = None,
                  library_name: str | None = None, options: dict | None = None,
                  alpha_grid: int = 100) -> dict:
        return self._request("POST", "/recognize", {
            "library": library,
            "library_name": library_name,
            "observation_csv": observation_csv,
            "options": options or {},
            "alpha_grid": alpha_grid,
        })

    def infer(self, observation_csv: str, *, library: dict | None = None,
              library_name: str | None = None, options: dict | None = None,
              alpha_grid: int = 100, t_out: int | None = None) -> dict:
        return self._request("POST", "/infer", {
            "library": library,
            "library_name": library_name,
            "observation_csv": observation_csv,
            "options": options or {},
            "alpha_grid": alpha_grid,
            "t_out": t_out,
        })

    def synth(self, spec: dict) -> dict:
        return self._request("POST", "/synth", spec)

    def evaluate(self, request: dict) -> dict:
        return self._request("POST", "/eval", request)

    def register_library(self, name: str, library: dict) -> dict:
        return self._request("POST", "/libraries", {"name": name, "library": library})

    def list_libraries(self) -> list:
        return self._request("GET", "/libraries")

    def get_library(self, name: str) -> dict:
        return self._request("GET", f"/libraries/{name}")

    def delete_library(self, name: str) -> dict:
        return self._request("DELETE", f"/libraries/{name}")
