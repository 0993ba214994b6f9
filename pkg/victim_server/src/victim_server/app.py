"""HTTP server exposing a text classifier behind the victim wire protocol.

POST /v1/classify with {"texts": [...]} returns {"probs": [[...], ...]},
one softmax probability vector per input, order-aligned. GET /v1/health
reports model metadata. Probabilities (never logits) cross the wire.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from transformers import AutoModelForSequenceClassification, AutoTokenizer


@dataclass
class ServerConfig:
    model: str
    host: str = "127.0.0.1"
    port: int = 8000
    max_batch: int = 64
    deterministic: bool = True


class ClassifierBackend:
    """Loads a sequence-classification model and answers probability queries."""

    def __init__(self, config: ServerConfig):
        self.config = config
        if config.deterministic:
            torch.manual_seed(0)
            torch.use_deterministic_algorithms(True)
        self.tokenizer = AutoTokenizer.from_pretrained(config.model)
        self.model = AutoModelForSequenceClassification.from_pretrained(config.model)
        self.model.eval()  # no dropout; inference only
        self.num_classes = self.model.config.num_labels
        self.name = getattr(self.model.config, "name_or_path", config.model)

    @torch.no_grad()
    def classify(self, texts: list[str]) -> list[list[float]]:
        encoded = self.tokenizer(
            texts, padding=True, truncation=True, max_length=256, return_tensors="pt"
        )
        logits = self.model(**encoded).logits
        probs = torch.softmax(logits.double(), dim=-1)
        return probs.tolist()


def create_app(config: ServerConfig, backend: ClassifierBackend | None = None) -> FastAPI:
    backend = backend or ClassifierBackend(config)
    app = FastAPI(title="victim-server")
    app.state.backend = backend

    @app.get("/v1/health")
    async def health():
        return {"num_classes": backend.num_classes, "name": backend.name}

    @app.post("/v1/classify")
    async def classify(request: Request):
        try:
            body = await request.json()
        except Exception:
            return JSONResponse({"error": "body is not valid JSON"}, status_code=400)
        if not isinstance(body, dict) or "texts" not in body:
            return JSONResponse({"error": "missing 'texts' key"}, status_code=400)
        texts = body["texts"]
        if (
            not isinstance(texts, list)
            or not texts
            or not all(isinstance(t, str) for t in texts)
        ):
            return JSONResponse(
                {"error": "'texts' must be a non-empty list of strings"},
                status_code=400,
            )
        if len(texts) > config.max_batch:
            return JSONResponse(
                {"error": f"batch of {len(texts)} exceeds max {config.max_batch}"},
                status_code=413,
            )
        return {"probs": backend.classify(texts)}

    return app
