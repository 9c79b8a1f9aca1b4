"""JSON and DOT serialization for frames, models, logics, and traces.

Frame: ``{"worlds": N, "edges": [[u, v], ...], "names": {...}}`` (names
optional).  Model: the frame object plus ``"valuation": {"p0": [worlds]}``.
"""

from __future__ import annotations

import json
from pathlib import Path

from .kripke import Frame, Model, members, skeleton

__all__ = [
    "FormatError", "frame_to_json", "frame_from_json", "model_to_json",
    "model_from_json", "load_json", "dump_json", "to_dot",
]


class FormatError(ValueError):
    pass


def frame_to_json(frame: Frame, names: dict | None = None) -> dict:
    out = {"worlds": frame.size, "edges": [list(e) for e in frame.edges()]}
    if names:
        out["names"] = {str(k): v for k, v in names.items()}
    return out


def _world(value, size: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value < size:
        raise FormatError(f"bad world id {value!r}")
    return value


def frame_from_json(data) -> Frame:
    try:
        size = data["worlds"]
        if isinstance(size, bool) or not isinstance(size, int) or size < 1:
            raise FormatError(f"'worlds' must be a positive integer, got {size!r}")
        edges = []
        for e in data.get("edges", []):
            if len(e) != 2:
                raise FormatError(f"edge {e!r} is not a pair")
            edges.append((_world(e[0], size), _world(e[1], size)))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed frame JSON: {exc}") from None
    return Frame.from_edges(size, edges)


def model_to_json(model: Model) -> dict:
    out = frame_to_json(model.frame)
    out["valuation"] = {k: members(v) for k, v in sorted(model.valuation.items())}
    return out


def model_from_json(data) -> Model:
    """Also accepts a search envelope carrying the model under ``"model"``."""
    if isinstance(data, dict) and isinstance(data.get("model"), dict):
        data = data["model"]
    frame = frame_from_json(data)
    val = data.get("valuation", {})
    if not isinstance(val, dict):
        raise FormatError("'valuation' must be an object")
    return Model(frame, {k: [_world(w, frame.size) for w in ws] for k, ws in val.items()})


def load_json(path: str | Path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None


def dump_json(data, path: str | Path | None = None) -> str:
    text = json.dumps(data, indent=2, sort_keys=False)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def to_dot(frame: Frame, valuation: dict | None = None, dashed=(), name: str = "F") -> str:
    """Graphviz source with one box per cluster; ``dashed`` edges drawn dashed."""
    sk = skeleton(frame)
    lines = [f"digraph {name} {{", "  compound=true;"]
    for c, cluster in enumerate(sk.clusters):
        lines.append(f"  subgraph cluster_{c} {{ style=rounded;")
        for w in members(cluster):
            props = [p for p, ws in sorted((valuation or {}).items()) if ws >> w & 1]
            label = f"{w}" + (f"\\n{','.join(props)}" if props else "")
            lines.append(f'    w{w} [label="{label}"];')
        lines.append("  }")
    dashed = set(dashed)
    for u, v in frame.edges():
        style = " [style=dashed]" if (u, v) in dashed else ""
        lines.append(f"  w{u} -> w{v}{style};")
    for u, v in sorted(dashed - set(frame.edges())):
        lines.append(f"  w{u} -> w{v} [style=dashed, color=gray];")
    lines.append("}")
    return "\n".join(lines)
