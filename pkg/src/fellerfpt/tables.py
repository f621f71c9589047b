"""CSV/JSON serialisation for density tables, FPT samples and parameter files."""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .laguerre import PdfTable
from .simulate import FptSample

__all__ = [
    "fmt",
    "write_pdf_csv",
    "read_pdf_csv",
    "write_pdf_json",
    "read_pdf_json",
    "read_pdf",
    "write_sample_csv",
    "read_sample_csv",
    "parse_params_text",
    "read_params_file",
    "bundled_params",
]


def fmt(x: float) -> str:
    """17 significant digits: enough to round-trip any double exactly."""
    return format(float(x), ".17g")


def _header(meta: dict) -> list[str]:
    return [f"# {k}: {json.dumps(v, sort_keys=True)}" for k, v in meta.items()]


def _parse_header(lines: list[str]) -> dict:
    meta = {}
    for line in lines:
        key, _, val = line[1:].strip().partition(":")
        try:
            meta[key.strip()] = json.loads(val)
        except json.JSONDecodeError:
            meta[key.strip()] = val.strip()
    return meta


def write_pdf_csv(table: PdfTable, path, manifest: str | None = None) -> None:
    meta = {"source": table.source, "params": table.params}
    if manifest:
        meta["manifest"] = manifest
    lines = _header(meta) + ["t,g_hat,flags"]
    lines += [f"{fmt(t)},{fmt(v)},{f}" for t, v, f in zip(table.grid, table.values, table.flags)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_pdf_csv(path) -> PdfTable:
    text = Path(path).read_text().splitlines()
    comments = [l for l in text if l.startswith("#")]
    body = [l for l in text if l and not l.startswith("#")]
    if not body or body[0].split(",")[:2] != ["t", "g_hat"]:
        raise ValueError(f"{path}: not a density table (expected header 't,g_hat,flags')")
    meta = _parse_header(comments)
    grid, values, flags = [], [], []
    for line in body[1:]:
        parts = line.split(",", 2)
        grid.append(float(parts[0]))
        values.append(float(parts[1]))
        flags.append(parts[2].strip('"') if len(parts) > 2 else "")
    return PdfTable(np.array(grid), np.array(values), source=meta.get("source", "unknown"),
                    params=meta.get("params", {}), flags=tuple(flags))


def write_pdf_json(table: PdfTable, path, manifest: str | None = None) -> None:
    doc = {
        "source": table.source,
        "params": table.params,
        "grid": table.grid.tolist(),
        "values": table.values.tolist(),
        "flags": list(table.flags),
    }
    if manifest:
        doc["manifest"] = manifest
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def read_pdf_json(path) -> PdfTable:
    doc = json.loads(Path(path).read_text())
    return PdfTable(np.array(doc["grid"], dtype=float), np.array(doc["values"], dtype=float),
                    source=doc.get("source", "unknown"), params=doc.get("params", {}),
                    flags=tuple(doc.get("flags", ())))


def read_pdf(path) -> PdfTable:
    return read_pdf_json(path) if str(path).endswith(".json") else read_pdf_csv(path)


def write_sample_csv(sample: FptSample, path, manifest: str | None = None) -> None:
    meta = {"t_max": sample.t_max, "dt": sample.dt, "reflections": sample.reflections}
    if manifest:
        meta["manifest"] = manifest
    lines = _header(meta) + ["path,t,censored"]
    lines += [f"{i},{fmt(t)},{int(c)}" for i, (t, c) in enumerate(zip(sample.times, sample.censored))]
    Path(path).write_text("\n".join(lines) + "\n")


def read_sample_csv(path) -> FptSample:
    text = Path(path).read_text().splitlines()
    meta = _parse_header([l for l in text if l.startswith("#")])
    body = [l for l in text if l and not l.startswith("#")]
    rows = [l.split(",") for l in body[1:]]
    times = np.array([float(r[1]) for r in rows])
    censored = np.array([r[2] == "1" for r in rows])
    return FptSample(times, censored, float(meta["t_max"]), float(meta["dt"]), int(meta.get("reflections", 0)))


def parse_params_text(text: str, origin: str = "<string>") -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep or not key.strip() or not val.strip():
            raise ValueError(f"{origin}:{lineno}: expected 'key = value', got {raw!r}")
        out[key.strip()] = val.strip()
    return out


def bundled_params() -> list[str]:
    root = resources.files("fellerfpt") / "data"
    return sorted(p.name[: -len(".params")] for p in root.iterdir() if p.name.endswith(".params"))


def read_params_file(name_or_path) -> dict[str, str]:
    """Read a parameter file; bare names resolve to the bundled examples."""
    path = Path(name_or_path)
    if path.exists():
        return parse_params_text(path.read_text(), str(path))
    if path.suffix == "" and str(name_or_path) in bundled_params():
        res = resources.files("fellerfpt") / "data" / f"{name_or_path}.params"
        return parse_params_text(res.read_text(), f"bundled:{name_or_path}")
    raise FileNotFoundError(f"parameter file not found: {name_or_path}")
