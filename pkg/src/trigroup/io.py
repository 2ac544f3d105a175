"""Run manifests and the JSONL/CSV writers that embed them.

The manifest written into an output file omits the timestamp and the worker
count, so reruns with any ``--threads`` give identical bytes.  The complete
manifest (with both) goes to a ``<output>.manifest.json`` sidecar.
"""

from __future__ import annotations

import csv
import io
import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from trigroup import __version__

VOLATILE = ("timestamp", "threads")


def make_manifest(subcommand: str, config: dict, seed: int | None, threads: int = 1, inputs=(), outputs=()) -> dict:
    return {
        "tool": "trigroup",
        "version": __version__,
        "subcommand": subcommand,
        "config": config,
        "seed": seed,
        "inputs": [str(x) for x in inputs],
        "outputs": [str(x) for x in outputs],
        "threads": threads,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def stable(manifest: dict) -> dict:
    return {k: v for k, v in manifest.items() if k not in VOLATILE}


def _clean(x):
    # JSON has no NaN; write null instead
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item"):
        return _clean(x.item())
    return x


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, separators=(",", ":"))


def jsonl_text(manifest: dict, rows: Iterable[dict]) -> str:
    lines = [dumps({"manifest": stable(manifest)})]
    lines.extend(dumps(r) for r in rows)
    return "\n".join(lines) + "\n"


def csv_text(manifest: dict, columns: Sequence[str], rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    buf.write("# manifest: " + dumps(stable(manifest)) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else ""
    return str(x)


def read_manifest(text: str) -> dict | None:
    """The manifest embedded in an output file, whatever its format."""
    for line in text.splitlines():
        if line.startswith("# manifest: "):
            return json.loads(line[len("# manifest: "):])
        if line.startswith("{"):
            doc = json.loads(line)
            return doc.get("manifest")
    return None


def write_output(text: str, path: str | None, manifest: dict, stdout) -> None:
    if path is None:
        stdout.write(text)
        return
    Path(path).write_text(text)
    Path(path + ".manifest.json").write_text(json.dumps(_clean(manifest), sort_keys=True, indent=2) + "\n")
