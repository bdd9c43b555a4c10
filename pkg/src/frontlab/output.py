"""File emission: CSV tables and JSON records.

Every float is written with 17 significant digits so round-tripping the
text reproduces the exact double; writes go to a temp file in the target
directory followed by an atomic rename, so no emitted file is ever
partially written.  The JSON serializer is local because the stdlib
encoder offers no control over float formatting; NaN/inf (invalid JSON)
map to null.
"""

from __future__ import annotations

import json
import math
import os

from .classify import PhaseTable
from .solver import Snapshot, Trajectory

TRAJECTORY_HEADER = "t,g,h,gdot,hdot,sup_u,sup_v,u_center,v_center"


def fmt_float(x: float) -> str:
    return f"{x:.17g}"


def _json_fragment(value, indent: int, out: list) -> None:
    pad = "  " * indent
    if value is None:
        out.append("null")
    elif isinstance(value, bool):
        out.append("true" if value else "false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        out.append(fmt_float(value) if math.isfinite(value) else "null")
    elif isinstance(value, str):
        out.append(json.dumps(value))
    elif isinstance(value, (list, tuple)):
        if not value:
            out.append("[]")
            return
        out.append("[\n")
        for i, item in enumerate(value):
            out.append(pad + "  ")
            _json_fragment(item, indent + 1, out)
            out.append(",\n" if i + 1 < len(value) else "\n")
        out.append(pad + "]")
    elif isinstance(value, dict):
        if not value:
            out.append("{}")
            return
        out.append("{\n")
        items = list(value.items())
        for i, (key, item) in enumerate(items):
            out.append(pad + "  " + json.dumps(str(key)) + ": ")
            _json_fragment(item, indent + 1, out)
            out.append(",\n" if i + 1 < len(items) else "\n")
        out.append(pad + "}")
    else:
        raise TypeError(f"cannot serialize {type(value).__name__} to JSON")


def dumps_json(value) -> str:
    out: list = []
    _json_fragment(value, 0, out)
    out.append("\n")
    return "".join(out)


def atomic_write_text(path: str, text: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_json(path: str, value) -> None:
    atomic_write_text(path, dumps_json(value))


def trajectory_csv(traj: Trajectory) -> str:
    lines = [TRAJECTORY_HEADER]
    cols = (traj.t, traj.g, traj.h, traj.gdot, traj.hdot,
            traj.sup_u, traj.sup_v, traj.u_center, traj.v_center)
    for row in zip(*cols):
        lines.append(",".join(fmt_float(val) for val in row))
    return "\n".join(lines) + "\n"


def snapshot_csv(snap: Snapshot) -> str:
    lines = ["x,u,v"]
    for x, u, v in zip(snap.x, snap.u, snap.v):
        lines.append(f"{fmt_float(x)},{fmt_float(u)},{fmt_float(v)}")
    return "\n".join(lines) + "\n"


def write_snapshots(outdir: str, traj: Trajectory) -> list:
    """One CSV matrix per stored snapshot; returns records for the summary."""
    records = []
    for i, snap in enumerate(traj.snapshots):
        name = f"snapshot_{i:05d}.csv"
        atomic_write_text(os.path.join(outdir, name), snapshot_csv(snap))
        records.append({"index": i, "t": snap.t, "g": snap.g, "h": snap.h, "file": name})
    return records


def phase_csv(table: PhaseTable) -> str:
    lines = [",".join(table.columns)]
    for row in table.rows:
        cells = []
        for col in table.columns:
            val = row[col]
            cells.append(fmt_float(val) if isinstance(val, float) else str(val))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
