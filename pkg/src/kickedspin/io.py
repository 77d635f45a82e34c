"""Artifact plumbing for the CLI: config parsing, CSV tables, manifests.

Configs are plain text ``key = value`` files.  Values understand integers,
floats, the token ``pi``, booleans, comma-separated lists, and inclusive
``start:stop:step`` ranges; anything else stays a string.  Unknown keys are
rejected by the command schemas in :mod:`kickedspin.cli` so that typos never
silently fall back to defaults.

Output tables are CSV with a single header line and floats printed with 17
significant digits, enough to round-trip IEEE doubles bit-exactly, so a
fixed seed reproduces byte-identical files on any platform or worker count.
Every run writes exactly one JSON manifest next to its table recording the
resolved parameters, engine id, seed, code version, wall time, and a SHA-256
digest per output file.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

OUTPUT_DIR_ENV = "KICKEDSPIN_OUTPUT_DIR"


class ConfigError(ValueError):
    """Invalid config file or overrides.  Mapped to exit code 2."""


def _parse_scalar(text: str):
    t = text.strip()
    if t == "pi":
        return math.pi
    if t == "-pi":
        return -math.pi
    low = t.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        pass
    return t


def parse_value(text: str):
    """Parse one config value: scalar, comma list, or a:b:step range."""
    t = text.strip()
    if "," in t:
        items = [p for p in (s.strip() for s in t.split(",")) if p]
        if not items:
            raise ConfigError(f"empty list value {text!r}")
        return [_parse_scalar(p) for p in items]
    if ":" in t:
        parts = t.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range must be start:stop:step, got {text!r}")
        a, b, s = (_parse_scalar(p) for p in parts)
        for v in (a, b, s):
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ConfigError(f"non-numeric range bound in {text!r}")
        if s == 0 or (b - a) * s < 0:
            raise ConfigError(f"empty range {text!r}")
        count = int(math.floor((b - a) / s + 1e-9)) + 1
        vals = [a + i * s for i in range(count)]
        if all(isinstance(v, int) for v in (a, b, s)):
            return [int(round(v)) for v in vals]
        return [float(v) for v in vals]
    return _parse_scalar(t)


def parse_config_text(text: str, source: str = "<config>") -> dict[str, Any]:
    """Parse ``key = value`` lines; comments (#) and blank lines skipped."""
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, "
                              f"got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        if not value.strip():
            raise ConfigError(f"{source}:{lineno}: key {key!r} has no value")
        try:
            out[key] = parse_value(value)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None
    return out


def load_config(path: str | Path) -> dict[str, Any]:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    return parse_config_text(text, source=str(p))


def apply_overrides(cfg: dict[str, Any],
                    overrides: Sequence[str]) -> dict[str, Any]:
    """Apply command-line ``key=value`` overrides on top of a config."""
    out = dict(cfg)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, _, value = item.partition("=")
        key = key.strip()
        if not key or not value.strip():
            raise ConfigError(f"override {item!r} is not key=value")
        out[key] = parse_value(value)
    return out


def resolve_output_dir(cfg: dict[str, Any]) -> Path:
    """Output directory: environment override > out_dir key > cwd."""
    env = os.environ.get(OUTPUT_DIR_ENV)
    if env:
        return Path(env)
    if "out_dir" in cfg:
        return Path(str(cfg["out_dir"]))
    return Path.cwd()


def format_cell(value: Any) -> str:
    """One CSV cell: floats at 17 significant digits, ints exact."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(path: Path, header: Sequence[str],
              rows: Iterable[Sequence[Any]]) -> None:
    """Write a table with one header line and fixed column order."""
    lines = [",".join(header)]
    width = len(header)
    for row in rows:
        if len(row) != width:
            raise ValueError(f"row width {len(row)} != header width {width}")
        lines.append(",".join(format_cell(c) for c in row))
    path.write_text("\n".join(lines) + "\n")


def load_table(path: str | Path) -> dict[str, np.ndarray]:
    """Read a numeric CSV written by write_csv into named float columns."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read table {p}: {exc}") from None
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ConfigError(f"{p}: empty table")
    header = [h.strip() for h in lines[0].split(",")]
    cols: list[list[float]] = [[] for _ in header]
    for lineno, ln in enumerate(lines[1:], start=2):
        cells = ln.split(",")
        if len(cells) != len(header):
            raise ConfigError(f"{p}:{lineno}: expected {len(header)} cells, "
                              f"got {len(cells)}")
        for c, cell in zip(cols, cells):
            try:
                c.append(float(cell))
            except ValueError:
                raise ConfigError(
                    f"{p}:{lineno}: non-numeric cell {cell!r}") from None
    return {name: np.asarray(col) for name, col in zip(header, cols)}


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


@dataclass
class RunManifest:
    """Reproducibility record accompanying every output table.

    Re-running the same command with the same resolved parameters and seed
    reproduces bit-identical CSV (the wall_time_s field is the only part of
    the run that is not reproducible).
    """

    command: str
    engine: str
    params: dict[str, Any]
    seed: int | None
    version: str
    wall_time_s: float
    outputs: dict[str, str] = field(default_factory=dict)

    def write(self, path: Path) -> None:
        doc = {
            "command": self.command,
            "engine": self.engine,
            "params": self.params,
            "seed": self.seed,
            "version": self.version,
            "wall_time_s": self.wall_time_s,
            "outputs": self.outputs,
        }
        path.write_text(json.dumps(doc, indent=2, sort_keys=True,
                                   default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")
