from fastapi import FastAPI, HTTPException, status

from .badness import component_breakdown
from .config import settings
from .errors import KnotError, OverUnderMismatch, TopologyChanged
from .knot import MinObj, fingerprint, to_controlpoints, to_minobj
from .models import (
    BadnessRequest,
    BadnessResponse,
    BadnessWeights,
    ConfigResponse,
    InspectResponse,
    KnotRequest,
    RenderRequest,
    SymmetrizeRequest,
    SymmetrizeResponse,
)
from .render import knotplot, knotplot2
from .svg_io import read_svg_text, to_svg_string
from .symmetry import symmetrize, symmetry_error

app = FastAPI(title="Knotfair", version=settings.version)


def _http_error(exc: KnotError) -> HTTPException:
    if isinstance(exc, OverUnderMismatch):
        return HTTPException(status_code=status.HTTP_409_CONFLICT, detail=str(exc))
    if isinstance(exc, TopologyChanged):
        return HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(exc))
    return HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(exc))


def _knot(body: KnotRequest) -> MinObj:
    try:
        return to_minobj(read_svg_text(body.svg, body.element_id))
    except KnotError as exc:
        raise _http_error(exc) from exc


@app.get("/healthz")
def healthz() -> dict:
    return {"status": "ok", "version": settings.version}


@app.get("/api/v1/config", response_model=ConfigResponse)
def get_config() -> ConfigResponse:
    return ConfigResponse(
        version=settings.version,
        threads=settings.threads,
        stroke_width=settings.stroke_width,
        gap=settings.gap,
        weights=BadnessWeights.from_file(settings.weights_file) if settings.weights_file else BadnessWeights(),
    )


@app.post("/api/v1/inspect", response_model=InspectResponse)
def inspect(body: KnotRequest) -> InspectResponse:
    m = _knot(body)
    c = to_controlpoints(m)
    try:
        found = fingerprint(c, threads=settings.threads)
        components = component_breakdown(c)
    except KnotError as exc:
        raise _http_error(exc) from exc
    return InspectResponse(
        nodes=m.n,
        dim=4 * m.n,
        crossings=found.crossing_count,
        crossing_pairs=list(found.crossing_pairs),
        components=components,
    )


@app.post("/api/v1/badness", response_model=BadnessResponse)
def badness(body: BadnessRequest) -> BadnessResponse:
    c = to_controlpoints(_knot(body))
    try:
        breakdown = component_breakdown(c, body.weights)
    except KnotError as exc:
        raise _http_error(exc) from exc
    return BadnessResponse(badness=breakdown.total, components=breakdown)


@app.post("/api/v1/symmetrize", response_model=SymmetrizeResponse)
def symmetrize_knot(body: SymmetrizeRequest) -> SymmetrizeResponse:
    m = _knot(body).centered()
    try:
        before = symmetry_error(m, body.symmetry)
        result = symmetrize(m, body.symmetry)
    except KnotError as exc:
        raise _http_error(exc) from exc
    return SymmetrizeResponse(
        svg=to_svg_string(knotplot2(to_controlpoints(result))),
        error_before=before,
        error_after=symmetry_error(result, body.symmetry),
    )


@app.post("/api/v1/render")
def render(body: RenderRequest) -> dict:
    c = to_controlpoints(_knot(body))
    try:
        if body.overunder is not None:
            doc = knotplot(c, body.overunder, body.options)
        else:
            doc = knotplot2(c, body.options)
    except KnotError as exc:
        raise _http_error(exc) from exc
    return {"svg": to_svg_string(doc), "breaks": len(doc.gaps)}
