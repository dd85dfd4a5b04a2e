"""HTTP service backing the browser annotation tool.

Stateless: every request carries the full calibration or scene document,
and all geometry is computed here so the annotation client never has to
reimplement the grid construction.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse

from .errors import CrowdEvalError, ParseError
from .geometry import CalibrationInput, SceneSpec, build_grid, pt


def _parse_calibration(doc) -> CalibrationInput:
    try:
        return CalibrationInput(
            i=pt(*doc["i"]), j=pt(*doc["j"]), k=pt(*doc["k"]), l=pt(*doc["l"]),
            u1=pt(*doc["u1"]), u2=pt(*doc["u2"]),
            image_width=int(doc["image_width"]),
            image_height=int(doc["image_height"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed calibration: {exc}") from exc


def create_app(media_root=None) -> FastAPI:
    """Build the service; media_root is where background images live."""
    media_root = Path(media_root) if media_root else Path.cwd()
    app = FastAPI(title="crowdeval annotation service")

    @app.exception_handler(CrowdEvalError)
    async def _domain_error(request: Request, exc: CrowdEvalError):
        return JSONResponse(
            status_code=400, content={"code": exc.code, "message": str(exc)}
        )

    async def _json_body(request: Request):
        try:
            return await request.json()
        except Exception as exc:
            raise ParseError(f"request body is not valid JSON: {exc}") from exc

    @app.post("/grid")
    async def grid_endpoint(request: Request):
        doc = await _json_body(request)
        if not isinstance(doc, dict):
            raise ParseError("calibration body must be a JSON object")
        calib = _parse_calibration(doc.get("calibration", doc))
        grid = build_grid(calib)
        return {
            "rows": grid.rows,
            "cols": grid.cols,
            "vanish": [float(v) for v in grid.vanish],
            "corners": grid.corners.tolist(),
        }

    @app.post("/scene/validate")
    async def validate_endpoint(request: Request):
        doc = await _json_body(request)
        import json as _json

        scene = SceneSpec.from_json(_json.dumps(doc))
        try:
            grid = scene.validate()
        except CrowdEvalError as exc:
            return {"ok": False, "errors": [{"code": exc.code, "message": str(exc)}]}
        return {"ok": True, "rows": grid.rows, "cols": grid.cols}

    @app.get("/background/{scene}")
    async def background_endpoint(scene: str):
        path = (media_root / f"{scene}.png").resolve()
        if media_root.resolve() not in path.parents or not path.is_file():
            return JSONResponse(
                status_code=404,
                content={"code": "NotFound", "message": f"no background for {scene!r}"},
            )
        return FileResponse(path, media_type="image/png")

    return app
