"""FastAPI application speaking the contradiction-check wire protocol.

POST /classify        {"premise","hypothesis"} -> three-way probabilities
POST /classify_batch  {"pairs": [[p, h], ...]} -> {"verdicts": [...]} in order
GET  /health          {"status","model"}; 503 until the model is loaded

400 on malformed input, 413 on oversize input or batch, 503 while unloaded.
"""
import logging
import threading

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .config import ServiceConfig
from .model import LabelMapError, MnliModel

logger = logging.getLogger(__name__)


class ModelHolder:
    """Model slot with a load state the health endpoint can report."""

    def __init__(self, cfg: ServiceConfig):
        self.cfg = cfg
        self.model = None
        self.error = None
        self._lock = threading.Lock()

    def load(self):
        with self._lock:
            if self.model is not None:
                return
            try:
                self.model = MnliModel(self.cfg.model, self.cfg.max_seq_len, self.cfg.device)
            except LabelMapError:
                raise
            except Exception as exc:
                self.error = f"{type(exc).__name__}: {exc}"
                logger.exception("model load failed")
                raise


def _bad_request(message: str) -> JSONResponse:
    return JSONResponse(status_code=400, content={"error": message})


def _validate_text(value, field: str, max_chars: int):
    if not isinstance(value, str):
        return _bad_request(f"field {field!r} must be a string")
    if not value:
        return _bad_request(f"field {field!r} must be non-empty")
    if len(value) > max_chars:
        return JSONResponse(status_code=413,
                            content={"error": f"field {field!r} exceeds {max_chars} characters"})
    return None


def create_app(cfg: ServiceConfig, load_on_startup: bool = True) -> FastAPI:
    app = FastAPI(title="nli-service")
    holder = ModelHolder(cfg)
    app.state.holder = holder

    if load_on_startup:
        @app.on_event("startup")
        def _load():
            holder.load()

    @app.exception_handler(RequestValidationError)
    async def _validation_to_400(request: Request, exc: RequestValidationError):
        return _bad_request(str(exc.errors()[:3]))

    def model_or_503():
        if holder.model is None:
            detail = holder.error or "model not loaded"
            return None, JSONResponse(status_code=503,
                                      content={"status": "unavailable", "error": detail})
        return holder.model, None

    @app.get("/health")
    def health():
        model, err = model_or_503()
        if err is not None:
            return err
        return {"status": "ok", "model": cfg.model}

    @app.post("/classify")
    async def classify(request: Request):
        model, err = model_or_503()
        if err is not None:
            return err
        try:
            body = await request.json()
        except Exception:
            return _bad_request("request body must be JSON")
        if not isinstance(body, dict):
            return _bad_request("request body must be a JSON object")
        for field in ("premise", "hypothesis"):
            if field not in body:
                return _bad_request(f"missing field {field!r}")
            problem = _validate_text(body[field], field, cfg.max_input_chars)
            if problem is not None:
                return problem
        verdict = model.classify_pairs([(body["premise"], body["hypothesis"])])[0]
        return verdict.as_json()

    @app.post("/classify_batch")
    async def classify_batch(request: Request):
        model, err = model_or_503()
        if err is not None:
            return err
        try:
            body = await request.json()
        except Exception:
            return _bad_request("request body must be JSON")
        pairs = body.get("pairs") if isinstance(body, dict) else None
        if not isinstance(pairs, list) or not pairs:
            return _bad_request("field 'pairs' must be a non-empty list of [premise, hypothesis]")
        if len(pairs) > cfg.max_batch:
            return JSONResponse(status_code=413,
                                content={"error": f"batch size {len(pairs)} exceeds "
                                                  f"limit {cfg.max_batch}"})
        cleaned = []
        for i, pair in enumerate(pairs):
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                return _bad_request(f"pairs[{i}] must be [premise, hypothesis]")
            for field, value in zip(("premise", "hypothesis"), pair):
                problem = _validate_text(value, f"pairs[{i}].{field}", cfg.max_input_chars)
                if problem is not None:
                    return problem
            cleaned.append((pair[0], pair[1]))
        verdicts = model.classify_pairs(cleaned)
        return {"verdicts": [v.as_json() for v in verdicts]}

    return app
