"""Deterministic, atomic output files with config provenance.

Every emitted file embeds the tool version and a hash of the canonical
config JSON, so identical runs produce byte-identical outputs and outputs
can be traced back to their configs.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(cfg) -> str:
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()[:12]


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file and rename, so readers never see partials."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def json_report(payload: dict, cfg, version: str) -> str:
    body = dict(payload)
    body["meta"] = {"tool_version": version, "config_hash": config_hash(cfg)}
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def csv_report(lines, cfg, version: str) -> str:
    meta = [
        f"# tool_version={version}",
        f"# config_hash={config_hash(cfg)}",
    ]
    return "\n".join(meta + list(lines)) + "\n"
