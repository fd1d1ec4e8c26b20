"""HTTP scoring service.

Implements the splax backend protocol bit-exactly:

    GET  /healthz                          -> 200
    POST /score {"batch": [{input_ids, attention_mask, token_type_ids}]}
         -> {"results": [{start_logits, end_logits}]}

Results align positionally with the request batch. Malformed requests get a
400 with a reason; inputs longer than the model's position limit too. The
model runs in eval mode under no_grad, so identical requests return
identical logits.
"""

from __future__ import annotations

import torch
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .model import SpanScoringModel, load_checkpoint


class ScoreItem(BaseModel):
    input_ids: list[int]
    attention_mask: list[int]
    token_type_ids: list[int]


class ScoreRequest(BaseModel):
    batch: list[ScoreItem]


def create_app(model: SpanScoringModel, device: str = "cpu") -> FastAPI:
    app = FastAPI(title="splax scoring service")
    dev = torch.device(device)
    model = model.to(dev).eval()

    @app.exception_handler(RequestValidationError)
    async def validation_to_400(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()[:3]})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/score")
    def score(req: ScoreRequest):
        if not req.batch:
            return JSONResponse(status_code=400, content={"detail": "empty batch"})
        max_len = model.max_input_len
        for i, item in enumerate(req.batch):
            n = len(item.input_ids)
            if n == 0:
                return JSONResponse(status_code=400, content={"detail": f"item {i} is empty"})
            if len(item.attention_mask) != n or len(item.token_type_ids) != n:
                return JSONResponse(
                    status_code=400,
                    content={"detail": f"item {i} has inconsistent sequence lengths"},
                )
            if n > max_len:
                return JSONResponse(
                    status_code=400,
                    content={"detail": f"item {i} has {n} tokens; model maximum is {max_len}"},
                )
        results: list[dict | None] = [None] * len(req.batch)
        # stack per length group; the wire usually carries one fixed length
        by_len: dict[int, list[int]] = {}
        for i, item in enumerate(req.batch):
            by_len.setdefault(len(item.input_ids), []).append(i)
        with torch.no_grad():
            for indices in by_len.values():
                input_ids = torch.tensor([req.batch[i].input_ids for i in indices], device=dev)
                attention = torch.tensor(
                    [req.batch[i].attention_mask for i in indices], device=dev
                )
                type_ids = torch.tensor(
                    [req.batch[i].token_type_ids for i in indices], device=dev
                )
                start_logits, end_logits = model(input_ids, attention, type_ids)
                for row, i in enumerate(indices):
                    results[i] = {
                        "start_logits": [float(v) for v in start_logits[row]],
                        "end_logits": [float(v) for v in end_logits[row]],
                    }
        return {"results": results}

    return app


def serve(checkpoint_dir: str, host: str = "127.0.0.1", port: int = 8000, device: str = "cpu"):
    import uvicorn

    model, _ = load_checkpoint(checkpoint_dir)
    uvicorn.run(create_app(model, device=device), host=host, port=port, log_level="warning")
