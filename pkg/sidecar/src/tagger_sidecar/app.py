"""HTTP surface of the sidecar.

* ``POST /tag`` with ``{"sentences": [["tok", ...], ...]}`` returns
  ``{"distributions": [[{label: prob, ...}, ...], ...]}``, one object per
  token, values summing to 1.
* ``GET /health`` returns ``{"status": "ok", "labels": [...]}``.

Malformed requests get HTTP 400 with a JSON error body.  The service is
stateless per request; batching inside one request is an internal detail.
"""

from __future__ import annotations

from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .model import WordTagger


class TagRequest(BaseModel):
    sentences: list[list[str]]


def create_app(tagger: WordTagger) -> FastAPI:
    app = FastAPI(title="tagger-sidecar", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def malformed(request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"error": str(exc.errors()[:3])})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "labels": list(tagger.labels)}

    @app.post("/tag")
    def tag(request: TagRequest) -> JSONResponse:
        for s_index, sentence in enumerate(request.sentences):
            for t_index, word in enumerate(sentence):
                if not word.strip():
                    return JSONResponse(
                        status_code=400,
                        content={"error": f"sentence {s_index} token {t_index} is empty"})
        return JSONResponse({"distributions": tagger.distributions(request.sentences)})

    return app
