"""HTTP surface of the case service.

Every request authenticates with a bearer token bound to one zone. Zones
see their own cases plus cases from zones that granted them read access;
everything else appears only as anonymized stubs (counts, never ids).
Cluster computation is global, so a case cluster can truthfully say "two
more cases exist elsewhere" without saying where. Errors are always
{"error": reason} with a conventional status code.
"""

from __future__ import annotations

from typing import Literal

from fastapi import Depends, FastAPI, Header, HTTPException
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel
from starlette.exceptions import HTTPException as StarletteHTTPException

from .. import __version__
from ..filenumber import FileNumberError, parse_file_number
from ..ledger import CASE_CATEGORIES
from ..linking import LINK_LEVELS, CaseClustering, link_cases
from ..network import build_network, export_network, network_payload
from ..pipeline import AnalysisBundle
from .store import CaseStore, DuplicateError, NotFoundError, TokenInfo


class ZoneCreate(BaseModel):
    zone_id: str
    name: str
    readable_by: list[str] = []


class CaseCreate(BaseModel):
    case_id: str
    category: str


class AnnotationCreate(BaseModel):
    address: str
    role: Literal["perpetrator", "victim"]


class ExchangeRequestCreate(BaseModel):
    exchange: str


def create_app(
    store: CaseStore,
    analysis: AnalysisBundle | None = None,
    min_collector_sources: int = 1,
) -> FastAPI:
    app = FastAPI(title="caselink case service", version=__version__)
    app.state.cluster_epoch = 0
    cluster_cache: dict[tuple[str, int], CaseClustering] = {}

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request, exc):  # type: ignore[no-untyped-def]
        return JSONResponse({"error": str(exc.detail)}, status_code=exc.status_code)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request, exc):  # type: ignore[no-untyped-def]
        first = exc.errors()[0] if exc.errors() else {}
        where = ".".join(str(part) for part in first.get("loc", ()))
        message = first.get("msg", "invalid request")
        return JSONResponse({"error": f"{where}: {message}" if where else message}, status_code=400)

    def caller(authorization: str | None = Header(default=None)) -> TokenInfo:
        if not authorization or not authorization.startswith("Bearer "):
            raise HTTPException(401, "missing bearer token")
        info = store.resolve_token(authorization.removeprefix("Bearer ").strip())
        if info is None:
            raise HTTPException(401, "unknown token")
        return info

    def _bump_epoch() -> None:
        app.state.cluster_epoch += 1
        cluster_cache.clear()

    def _clustering(level: str) -> CaseClustering:
        """Global clustering over every stored case, cached per epoch."""
        if level not in LINK_LEVELS:
            raise HTTPException(400, f"unknown link level {level!r}")
        if level != "address" and analysis is None:
            raise HTTPException(
                400, f"{level}-level linking needs a loaded ledger; only address level is available"
            )
        key = (level, app.state.cluster_epoch)
        found = cluster_cache.get(key)
        if found is None:
            graph = analysis.graph if analysis is not None else None
            found = link_cases(store.case_records(), level, graph, min_collector_sources)
            cluster_cache[key] = found
        return found

    # -- zones -----------------------------------------------------------

    @app.post("/zones", status_code=201)
    def create_zone(body: ZoneCreate, who: TokenInfo = Depends(caller)) -> dict:
        if not who.is_admin:
            raise HTTPException(403, "zone management needs an admin token")
        try:
            store.create_zone(body.zone_id, body.name, tuple(body.readable_by))
        except DuplicateError as exc:
            raise HTTPException(409, str(exc)) from exc
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from exc
        zone = store.get_zone(body.zone_id)
        assert zone is not None
        return zone

    # -- cases -----------------------------------------------------------

    @app.post("/cases", status_code=201)
    def create_case(body: CaseCreate, who: TokenInfo = Depends(caller)) -> dict:
        try:
            parse_file_number(body.case_id)
        except FileNumberError as exc:
            raise HTTPException(400, str(exc)) from exc
        if body.category not in CASE_CATEGORIES:
            raise HTTPException(400, f"unknown case category {body.category!r}")
        try:
            created = store.create_case(body.case_id, body.category, who.zone_id)
        except DuplicateError as exc:
            raise HTTPException(409, str(exc)) from exc
        _bump_epoch()
        return created

    @app.get("/cases")
    def list_cases(who: TokenInfo = Depends(caller)) -> dict:
        visible = store.visible_zones(who.zone_id)
        cases = store.list_cases(visible)
        for case in cases:
            case["annotation_count"] = len(store.annotations(case["case_id"]))
        return {"cases": cases}

    # Case ids are file numbers and contain a slash, so the path matchers
    # must swallow slashes; the annotations route is registered first.

    @app.post("/cases/{case_id:path}/annotations", status_code=201)
    def annotate(case_id: str, body: AnnotationCreate, who: TokenInfo = Depends(caller)) -> dict:
        case = store.get_case(case_id)
        if case is None or case["zone_id"] not in store.visible_zones(who.zone_id):
            raise HTTPException(404, f"no case {case_id!r}")
        if case["zone_id"] != who.zone_id:
            raise HTTPException(403, "only the owning zone may annotate a case")
        try:
            created = store.add_annotation(case_id, body.address, body.role, who.member)
        except DuplicateError as exc:
            raise HTTPException(409, str(exc)) from exc
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from exc
        _bump_epoch()
        return created

    @app.get("/cases/{case_id:path}")
    def get_case(case_id: str, who: TokenInfo = Depends(caller)) -> dict:
        case = store.get_case(case_id)
        if case is None or case["zone_id"] not in store.visible_zones(who.zone_id):
            raise HTTPException(404, f"no case {case_id!r}")
        case["annotations"] = store.annotations(case_id)
        return case

    # -- clusters and network ---------------------------------------------

    @app.get("/clusters")
    def clusters(level: str = "address", who: TokenInfo = Depends(caller)) -> dict:
        clustering = _clustering(level)
        visible = store.visible_zones(who.zone_id)
        zone_of = {c["case_id"]: c["zone_id"] for c in store.list_cases()}
        payload = []
        for cluster in clustering.clusters:
            visible_ids = [cid for cid in cluster.case_ids if zone_of.get(cid) in visible]
            if not visible_ids:
                continue
            payload.append(
                {
                    "size": cluster.size,
                    "case_ids": visible_ids,
                    "hidden_count": cluster.size - len(visible_ids),
                    "inflow_satoshi": cluster.inflow_satoshi,
                    "contains_service_evidence": cluster.contains_service_evidence,
                }
            )
        return {"level": level, "clusters": payload}

    @app.get("/network")
    def network(
        level: str = "address", format: str = "json", who: TokenInfo = Depends(caller)
    ):
        if format not in ("json", "dot"):
            raise HTTPException(400, f"unknown network format {format!r}")
        if level not in LINK_LEVELS:
            raise HTTPException(400, f"unknown link level {level!r}")
        if level != "address" and analysis is None:
            raise HTTPException(
                400, f"{level}-level linking needs a loaded ledger; only address level is available"
            )
        # The network renders only what the caller may see: clustering is
        # re-run over visible cases so hidden linkage cannot leak as edges.
        visible = store.visible_zones(who.zone_id)
        records = [r for r in store.case_records() if r.zone_id in visible]
        graph = analysis.graph if analysis is not None else None
        clustering = link_cases(records, level, graph, min_collector_sources)
        doc = build_network(records, clustering, graph, min_collector_sources)
        if format == "dot":
            return PlainTextResponse(
                export_network(doc, "dot").decode("utf-8"), media_type="text/vnd.graphviz"
            )
        return JSONResponse(network_payload(doc))

    # -- exchange requests -------------------------------------------------

    @app.post("/addresses/{address}/requests", status_code=201)
    def log_request(
        address: str, body: ExchangeRequestCreate, who: TokenInfo = Depends(caller)
    ) -> dict:
        try:
            return store.log_exchange_request(address, body.exchange, who.zone_id)
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from exc

    @app.get("/addresses/{address}/requests")
    def list_requests(address: str, who: TokenInfo = Depends(caller)) -> dict:
        visible = store.visible_zones(who.zone_id)
        rows = store.requests_for(address)
        own = [row for row in rows if row["zone_id"] in visible]
        # Requests from other zones surface only as a flag: enough to
        # avoid duplicate exchange paperwork, nothing to identify anyone.
        return {
            "address": address,
            "requests": own,
            "requested_elsewhere": any(row["zone_id"] not in visible for row in rows),
        }

    return app
