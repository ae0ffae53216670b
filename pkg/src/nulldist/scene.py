"""Scene files: versioned JSON descriptions of a spacetime + time function +
grid discretization.  Parsing is strict (unknown keys rejected) and scenes
round-trip exactly through emit -> parse."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .errors import SceneError
from .grid import GridParams, StencilSpec
from .spacetime import Spacetime, builtin
from .timefn import TimeFunction, affine_time, coordinate_time, cubed_time

SCHEMA_VERSION = 1

_SPACETIME_KEYS = {"name", "params"}
_TIME_KINDS = {"coordinate", "cubed", "affine"}


def _check_keys(d: dict, allowed: set, where: str):
    unknown = set(d) - allowed
    if unknown:
        raise SceneError(f"unknown keys {sorted(unknown)} in {where}")


@dataclass(frozen=True)
class Scene:
    dim: int
    spacetime_spec: dict
    time_spec: dict
    grid_spec: Optional[dict] = None

    # -- parsing ------------------------------------------------------------

    @staticmethod
    def from_dict(data: dict) -> "Scene":
        if not isinstance(data, dict):
            raise SceneError("scene must be a JSON object")
        _check_keys(data, {"schema", "dim", "spacetime", "time", "grid"}, "scene")
        if data.get("schema") != SCHEMA_VERSION:
            raise SceneError(f"unsupported schema {data.get('schema')!r}; expected {SCHEMA_VERSION}")
        if "dim" not in data or "spacetime" not in data:
            raise SceneError("scene requires 'dim' and 'spacetime'")
        dim = int(data["dim"])
        st = dict(data["spacetime"])
        _check_keys(st, _SPACETIME_KEYS, "scene.spacetime")
        if "name" not in st:
            raise SceneError("scene.spacetime requires 'name'")
        st.setdefault("params", {})
        time_spec = dict(data.get("time", {"kind": "coordinate"}))
        _check_keys(time_spec, {"kind", "scale", "offset"}, "scene.time")
        if time_spec.get("kind", "coordinate") not in _TIME_KINDS:
            raise SceneError(f"unknown time kind {time_spec.get('kind')!r}")
        grid_spec = data.get("grid")
        if grid_spec is not None:
            grid_spec = dict(grid_spec)
            _check_keys(grid_spec, {"box", "h", "stencil_radius", "include_null_exact"},
                        "scene.grid")
            if "box" not in grid_spec or "h" not in grid_spec:
                raise SceneError("scene.grid requires 'box' and 'h'")
            box = grid_spec["box"]
            if len(box) != dim or any(len(b) != 2 for b in box):
                raise SceneError("scene.grid.box must hold one [lo, hi] pair per dimension")
        return Scene(dim=dim, spacetime_spec=st, time_spec=time_spec, grid_spec=grid_spec)

    @staticmethod
    def from_json(text: str) -> "Scene":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SceneError(
                f"scene JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
        return Scene.from_dict(data)

    @staticmethod
    def from_file(path: str) -> "Scene":
        with open(path, "r", encoding="utf-8") as fh:
            return Scene.from_json(fh.read())

    # -- emission -------------------------------------------------------------

    def to_dict(self) -> dict:
        out = {
            "schema": SCHEMA_VERSION,
            "dim": self.dim,
            "spacetime": {"name": self.spacetime_spec["name"],
                          "params": dict(self.spacetime_spec.get("params", {}))},
            "time": dict(self.time_spec),
        }
        if self.grid_spec is not None:
            out["grid"] = dict(self.grid_spec)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    # -- realization ----------------------------------------------------------

    def spacetime(self) -> Spacetime:
        name = self.spacetime_spec["name"]
        params = dict(self.spacetime_spec.get("params", {}))
        if name == "conformal" and isinstance(params.get("base"), dict):
            base = dict(params["base"])
            base_params = base.pop("params", {})
            params["base"] = builtin(base.pop("name"), dim=self.dim, **base_params)
        return builtin(name, dim=self.dim, **params)

    def time_function(self, st: Optional[Spacetime] = None) -> TimeFunction:
        st = st if st is not None else self.spacetime()
        kind = self.time_spec.get("kind", "coordinate")
        if kind == "coordinate":
            return coordinate_time(st)
        if kind == "cubed":
            return cubed_time(st)
        return affine_time(st, scale=float(self.time_spec.get("scale", 1.0)),
                           offset=float(self.time_spec.get("offset", 0.0)))

    def grid_params(self, h: Optional[float] = None,
                    stencil_radius: Optional[int] = None) -> GridParams:
        if self.grid_spec is None:
            raise SceneError("scene has no grid section")
        radius = stencil_radius if stencil_radius is not None else int(
            self.grid_spec.get("stencil_radius", 2))
        stencil = StencilSpec(radius=radius,
                              include_null_exact=bool(self.grid_spec.get("include_null_exact", True)))
        return GridParams(box=tuple(tuple(b) for b in self.grid_spec["box"]),
                          h=float(h if h is not None else self.grid_spec["h"]),
                          stencil=stencil)
