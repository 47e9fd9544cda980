"""HTTP back end over a loaded archive store.

Endpoints under /api/ expose metadata queries, similarity search, image
downloads, the download cart, and feedback. The store itself is read-only;
carts (in-memory, per-session, idle expiry) and the feedback file are the
only mutable state. The service-layer functions build the exact response
documents, so the CLI can reuse them byte for byte.
"""

from __future__ import annotations

import io
import json
import threading
import time
import zipfile
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np
from fastapi import Body, FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from fastapi.staticfiles import StaticFiles

from .catalog import (
    MAX_PAGE_SIZE,
    PatchRecord,
    Query,
    QueryValidationError,
    label_histogram,
    stats_with_colors,
)
from .codes import HashCode
from .geo import Circle, Polygon, Rect, Shape
from .hashing import extract_features, infer_code
from .labels import LabelPredicate, Operator, UnknownLabel
from .store import ArchiveStore

RENDER_CAP = 1000
DEFAULT_RADIUS = 2
DEFAULT_K = 20
MAX_CART_BATCH = 50
CART_TTL_SECONDS = 3600
MAX_UPLOAD_BYTES = 32 * 1024 * 1024

_QUERY_FIELDS = {
    "shape",
    "date_range",
    "seasons",
    "satellites",
    "label_predicate",
    "page",
    "page_size",
    "render",
}


def _shape_from_wire(doc: dict, problems: dict[str, str]) -> Shape | None:
    kind = doc.get("type")
    try:
        if kind == "rectangle":
            return Rect(doc["min_lon"], doc["min_lat"], doc["max_lon"], doc["max_lat"])
        if kind == "circle":
            return Circle(doc["center_lon"], doc["center_lat"], doc["radius_m"])
        if kind == "polygon":
            return Polygon(tuple((v[0], v[1]) for v in doc["vertices"]))
        problems["shape"] = f"unknown shape type {kind!r}"
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        problems["shape"] = str(exc)
    return None


def parse_query(payload: dict, store: ArchiveStore) -> Query:
    """Wire JSON -> Query; raises QueryValidationError listing bad fields."""
    if not isinstance(payload, dict):
        raise QueryValidationError({"body": "must be a JSON object"})
    problems: dict[str, str] = {}
    unknown = set(payload) - _QUERY_FIELDS
    for name in sorted(unknown):
        problems[name] = "unrecognized field"

    shape = None
    if payload.get("shape") is not None:
        shape = _shape_from_wire(payload["shape"], problems)

    date_range = None
    if payload.get("date_range") is not None:
        try:
            doc = payload["date_range"]
            date_range = (date.fromisoformat(doc["start"]), date.fromisoformat(doc["end"]))
        except (KeyError, TypeError, ValueError) as exc:
            problems["date_range"] = str(exc)

    seasons = frozenset(payload["seasons"]) if payload.get("seasons") is not None else None
    satellites = (
        frozenset(payload["satellites"]) if payload.get("satellites") is not None else None
    )

    predicate = LabelPredicate(Operator.NONE)
    if payload.get("label_predicate") is not None:
        doc = payload["label_predicate"]
        try:
            operator = Operator(doc.get("operator", "none"))
            selected = frozenset(doc.get("selected") or [])
            if operator is not Operator.NONE:
                selected = store.hierarchy.expand_selection(selected)
            predicate = LabelPredicate(operator, selected)
        except UnknownLabel as exc:
            problems["label_predicate"] = f"unknown label {exc.args[0]!r}"
        except ValueError as exc:
            problems["label_predicate"] = str(exc)

    if problems:
        raise QueryValidationError(problems)

    query = Query(
        shape=shape,
        date_range=date_range,
        seasons=seasons,
        satellites=satellites,
        label_predicate=predicate,
        page=int(payload.get("page", 0)),
        page_size=int(payload.get("page_size", MAX_PAGE_SIZE)),
    )
    query.validate()
    return query


def record_to_wire(record: PatchRecord) -> dict:
    return {
        "patch_name": record.patch_name,
        "bounds": {
            "min_lon": record.bounds.min_lon,
            "min_lat": record.bounds.min_lat,
            "max_lon": record.bounds.max_lon,
            "max_lat": record.bounds.max_lat,
        },
        "labels": sorted(record.labels),
        "acquisition_date": record.acquisition_date.isoformat(),
        "season": record.season,
        "satellite": record.satellite,
        "country": record.country,
    }


# --- service layer (shared by HTTP endpoints and the CLI) -------------------


def run_query(store: ArchiveStore, payload: dict) -> dict:
    query = parse_query(payload, store)
    result = store.catalog.execute_query(query)
    body = {
        "total": result.total,
        "page": [record_to_wire(r) for r in result.page],
        "stats": stats_with_colors(result.stats, store.hierarchy),
    }
    render = bool(payload.get("render", False))
    enabled = render and result.total <= RENDER_CAP
    body["render_enabled"] = enabled
    body["render_over_cap"] = render and result.total > RENDER_CAP
    if enabled:
        body["rendered"] = [
            {
                "patch_name": r.patch_name,
                "url": f"/api/image/{r.patch_name}?kind=rendered",
                "bounds": record_to_wire(r)["bounds"],
            }
            for r in result.page
        ]
    return body


def run_query_names(store: ArchiveStore, payload: dict) -> str:
    payload = dict(payload)
    payload.setdefault("page_size", MAX_PAGE_SIZE)
    query = parse_query(payload, store)
    names = store.catalog.match_names(query)
    return "".join(name + "\n" for name in names)


def run_stats(store: ArchiveStore, payload: dict) -> dict:
    query = parse_query(payload, store)
    matches = store.catalog.match_names(query)
    stats = label_histogram(store.catalog.records[name] for name in matches)
    return {"total": len(matches), "stats": stats_with_colors(stats, store.hierarchy)}


class SimilarRequestError(ValueError):
    def __init__(self, status: int, message: str):
        self.status = status
        super().__init__(message)


def run_similar(store: ArchiveStore, payload: dict) -> dict:
    """Similarity search by archive patch name or uploaded payload."""
    if not isinstance(payload, dict):
        raise SimilarRequestError(400, "body must be a JSON object")
    name = payload.get("patch_name")
    upload = payload.get("payload")
    if (name is None) == (upload is None):
        raise SimilarRequestError(400, "exactly one of patch_name or payload is required")
    radius = payload.get("radius")
    k = payload.get("k")
    if radius is not None and k is not None:
        raise SimilarRequestError(400, "radius and k are mutually exclusive")

    if name is not None:
        if name not in store.code_table:
            raise SimilarRequestError(404, f"unknown patch {name!r}")
        code = store.code_table.lookup(name)
        query_ref = name
    else:
        code = _code_from_upload(store, upload)
        query_ref = "upload"

    if k is not None:
        k = int(k)
        if k < 1:
            raise SimilarRequestError(400, "k must be >= 1")
        neighbors = store.code_table.query_knn(code, k)
    else:
        radius = DEFAULT_RADIUS if radius is None else int(radius)
        if not 0 <= radius <= store.code_table.width:
            raise SimilarRequestError(
                400, f"radius must be in [0, {store.code_table.width}]"
            )
        neighbors = store.code_table.query_radius(code, radius)

    records = store.catalog.records
    stats = label_histogram(
        records[nb.patch_name] for nb in neighbors if nb.patch_name != query_ref
    )
    return {
        "query_ref": query_ref,
        "neighbors": [
            {
                "patch_name": nb.patch_name,
                "distance": nb.distance,
                "record": record_to_wire(records[nb.patch_name]),
            }
            for nb in neighbors
        ],
        "stats": stats_with_colors(stats, store.hierarchy),
    }


def _code_from_upload(store: ArchiveStore, upload) -> HashCode:
    if not isinstance(upload, dict):
        raise SimilarRequestError(400, "payload must be an object")
    features = upload.get("features")
    bands = upload.get("bands")
    if (features is None) == (bands is None):
        raise SimilarRequestError(400, "payload needs exactly one of features or bands")
    head = store.head
    if features is not None:
        vector = np.asarray(features, dtype=np.float64)
        if vector.ndim != 1 or not np.isfinite(vector).all():
            raise SimilarRequestError(400, "features must be a flat list of finite numbers")
        if vector.shape[0] != head.dim:
            raise SimilarRequestError(
                422, f"feature dimension {vector.shape[0]} != model dimension {head.dim}"
            )
    else:
        if not isinstance(bands, dict) or not bands:
            raise SimilarRequestError(400, "bands must be a non-empty object of 2-d grids")
        try:
            grids = {name: np.asarray(g, dtype=np.float64) for name, g in bands.items()}
            vector = extract_features(grids, dim=head.dim)
        except (ValueError, TypeError) as exc:
            raise SimilarRequestError(400, f"bad band grids: {exc}") from None
    return infer_code(head, vector)


# --- carts ------------------------------------------------------------------


@dataclass
class _CartState:
    names: set[str] = field(default_factory=set)
    last_access: float = field(default_factory=time.monotonic)


class CartStore:
    """Per-session carts with idle expiry; set semantics on names."""

    def __init__(self, ttl_seconds: float = CART_TTL_SECONDS):
        self.ttl = ttl_seconds
        self._carts: dict[str, _CartState] = {}
        self._lock = threading.Lock()

    def _sweep(self, now: float) -> None:
        dead = [sid for sid, cart in self._carts.items() if now - cart.last_access > self.ttl]
        for sid in dead:
            del self._carts[sid]

    def add(self, session: str, names: list[str]) -> int:
        now = time.monotonic()
        with self._lock:
            self._sweep(now)
            cart = self._carts.setdefault(session, _CartState())
            cart.names.update(names)
            cart.last_access = now
            return len(cart.names)

    def get(self, session: str) -> list[str]:
        now = time.monotonic()
        with self._lock:
            self._sweep(now)
            cart = self._carts.get(session)
            if cart is None:
                return []
            cart.last_access = now
            return sorted(cart.names)


# --- app --------------------------------------------------------------------


def hierarchy_to_wire(store: ArchiveStore) -> dict:
    h = store.hierarchy
    return {
        "levels": [
            {
                "name": l1,
                "children": [
                    {"name": l2, "leaves": list(h.level2[l2])} for l2 in h.level1[l1]
                ],
            }
            for l1 in h.level1
        ],
        "colors": {leaf: h.color(leaf) for leaf in h.leaves},
    }


def create_app(store: ArchiveStore, frontend_dir: str | None = None,
               cart_ttl: float = CART_TTL_SECONDS) -> FastAPI:
    app = FastAPI(title="hashcube", docs_url=None, redoc_url=None)
    carts = CartStore(ttl_seconds=cart_ttl)
    feedback_lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError):
        fields = {".".join(str(p) for p in err["loc"]): err["msg"] for err in exc.errors()}
        return JSONResponse(status_code=400, content={"error": "validation", "fields": fields})

    @app.exception_handler(QueryValidationError)
    async def _bad_query(request: Request, exc: QueryValidationError):
        return JSONResponse(status_code=400, content={"error": "validation", "fields": exc.fields})

    @app.post("/api/query")
    async def api_query(payload: dict = Body(...)):
        return JSONResponse(run_query(store, payload))

    @app.get("/api/query/names", response_class=PlainTextResponse)
    async def api_query_names(filter: str = "{}"):
        try:
            payload = json.loads(filter)
        except ValueError as exc:
            raise QueryValidationError({"filter": f"not valid JSON: {exc}"})
        return PlainTextResponse(run_query_names(store, payload))

    @app.post("/api/similar")
    async def api_similar(request: Request, payload: dict = Body(...)):
        length = request.headers.get("content-length")
        if length and int(length) > MAX_UPLOAD_BYTES:
            raise HTTPException(status_code=413, detail="upload exceeds 32 MiB")
        try:
            return JSONResponse(run_similar(store, payload))
        except SimilarRequestError as exc:
            raise HTTPException(status_code=exc.status, detail=str(exc))

    @app.get("/api/image/{name}")
    async def api_image(name: str, kind: str = "rendered"):
        if name not in store.code_table:
            raise HTTPException(status_code=404, detail=f"unknown patch {name!r}")
        if kind == "rendered":
            path = store.rendered_path(name)
            if not path.exists():
                raise HTTPException(status_code=404, detail=f"no rendered image for {name!r}")
            return Response(content=path.read_bytes(), media_type="image/png")
        if kind == "bands":
            return Response(
                content=store.bands_zip(name),
                media_type="application/zip",
                headers={"Content-Disposition": f'attachment; filename="{name}.zip"'},
            )
        raise HTTPException(status_code=400, detail=f"unknown kind {kind!r}")

    @app.post("/api/cart/{session}/add")
    async def api_cart_add(session: str, payload: dict = Body(...)):
        names = payload.get("names")
        if not isinstance(names, list) or not names:
            raise HTTPException(status_code=400, detail="names must be a non-empty list")
        if len(names) > MAX_CART_BATCH:
            raise HTTPException(
                status_code=400,
                detail=f"batch of {len(names)} exceeds the {MAX_CART_BATCH}-name cap",
            )
        unknown = [n for n in names if n not in store.code_table]
        if unknown:
            raise HTTPException(status_code=404, detail=f"unknown patches: {unknown[:5]}")
        size = carts.add(session, names)
        return JSONResponse({"session": session, "size": size})

    @app.get("/api/cart/{session}")
    async def api_cart_get(session: str):
        return JSONResponse({"session": session, "names": carts.get(session)})

    @app.get("/api/cart/{session}/download")
    async def api_cart_download(session: str):
        names = carts.get(session)
        buffer = io.BytesIO()
        with zipfile.ZipFile(buffer, "w") as zf:
            for name in names:
                zf.writestr(zipfile.ZipInfo(f"{name}.zip"), store.bands_zip(name))
        return Response(
            content=buffer.getvalue(),
            media_type="application/zip",
            headers={"Content-Disposition": 'attachment; filename="cart.zip"'},
        )

    @app.post("/api/feedback", status_code=201)
    async def api_feedback(payload: dict = Body(...)):
        text = payload.get("text", "")
        if not isinstance(text, str) or not text.strip():
            raise HTTPException(status_code=400, detail="feedback text must be non-empty")
        with feedback_lock:
            count = store.append_feedback(text)
        return JSONResponse({"count": count}, status_code=201)

    @app.get("/api/hierarchy")
    async def api_hierarchy():
        return JSONResponse(hierarchy_to_wire(store))

    if frontend_dir and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="frontend")

    return app
