"""JSON serialization, schema access and the flat text rendering of reports."""

from __future__ import annotations

import json
from importlib import resources


def dumps(report: dict) -> str:
    # sorted keys and no NaN/inf keep output byte-stable and strictly valid JSON
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def load_schema() -> dict:
    return json.loads(resources.files("voptkkt").joinpath("report_schema.json").read_text())


def flatten(obj, prefix: str = "") -> list[tuple[str, object]]:
    """Every leaf of a JSON value as (dotted path, value); empty containers are leaves."""
    out = []
    if isinstance(obj, dict):
        if not obj:
            out.append((prefix, {}))
        for k in sorted(obj):
            out += flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list):
        if not obj:
            out.append((prefix, []))
        for i, v in enumerate(obj):
            out += flatten(v, f"{prefix}[{i}]")
    else:
        out.append((prefix, obj))
    return out


def render_text(report: dict) -> str:
    lines = []
    for path, value in flatten(report):
        if isinstance(value, str):
            shown = value
        else:
            shown = json.dumps(value)
        lines.append(f"{path}: {shown}")
    return "\n".join(lines) + "\n"
