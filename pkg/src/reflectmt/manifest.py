"""Run manifests: every command writes one next to its outputs.

A manifest echoes the fully resolved configuration plus digests of every
input file, which is enough to re-run the command and to audit emitted
datasets.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from . import __version__


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path: str | Path, command: str, config: dict, inputs: dict | None = None,
                   outputs: dict | None = None, counters: dict | None = None):
    payload = {
        "tool": {"name": "reflectmt", "version": __version__},
        "command": command,
        "config": config,
        "inputs": inputs or {},
        "outputs": outputs or {},
        "counters": counters or {},
    }
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return payload
