"""HTTP client for the normcluster service.

Without a base URL the client mounts the service in-process through an
ASGI transport, so batch jobs run without a daemon; pass a URL to talk to
a remote `normcluster serve` instance instead. Either way every request
goes through the same endpoint schemas.
"""

from __future__ import annotations

from typing import Optional

import httpx


class ServiceError(RuntimeError):
    """Non-2xx response from the service."""

    def __init__(self, status_code: int, detail: str):
        self.status_code = status_code
        self.detail = detail
        super().__init__(f"service returned {status_code}: {detail}")

    @property
    def is_input_error(self) -> bool:
        return 400 <= self.status_code < 500


class ServiceClient:
    def __init__(self, base_url: Optional[str] = None, timeout: float = 600.0):
        if base_url:
            self._client: httpx.Client = httpx.Client(base_url=base_url, timeout=timeout)
        else:
            # sync bridge into the ASGI app; unhandled server errors come
            # back as 500 responses, exactly like a remote server
            import warnings

            with warnings.catch_warnings():
                # starlette's httpx2 migration notice (a UserWarning subclass)
                warnings.simplefilter("ignore")
                from starlette.testclient import TestClient

            from .service.app import create_app

            self._client = TestClient(create_app(), raise_server_exceptions=False)

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "ServiceClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _post(self, path: str, payload: dict) -> dict:
        response = self._client.post(path, json=payload)
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail", response.text)
            except ValueError:
                detail = response.text
            raise ServiceError(response.status_code, str(detail))
        return response.json()

    def health(self) -> dict:
        response = self._client.get("/health")
        if response.status_code >= 400:
            raise ServiceError(response.status_code, response.text)
        return response.json()

    def validate(self, corpus_jsonl: str) -> dict:
        return self._post("/corpus/validate", {"corpus_jsonl": corpus_jsonl})

    def cluster(self, payload: dict) -> dict:
        return self._post("/cluster", payload)

    def grid(self, spec: dict) -> dict:
        return self._post("/grid", {"spec": spec})

    def sweep(self, spec: dict, corpora: dict[str, str], workers: Optional[int] = None) -> dict:
        return self._post("/sweep", {"spec": spec, "corpora": corpora, "workers": workers})

    def rank(self, results: list[dict], top_n: Optional[int]) -> dict:
        return self._post("/rank", {"results": results, "top_n": top_n})

    def fit(self, payload: dict) -> dict:
        return self._post("/classifier/fit", payload)

    def predict(self, payload: dict) -> dict:
        return self._post("/classifier/predict", payload)

    def calibrate(self, payload: dict) -> dict:
        return self._post("/classifier/calibrate", payload)

    def evaluate(self, predictions: list[dict], gold: dict[str, str]) -> dict:
        return self._post("/classifier/evaluate", {"predictions": predictions, "gold": gold})

    def segment(self, doc_id: str, text: str) -> dict:
        return self._post("/segment", {"doc_id": doc_id, "text": text})

    def mine(self, payload: dict) -> dict:
        return self._post("/mine", payload)

    def merge(self, payload: dict) -> dict:
        return self._post("/merge", payload)
