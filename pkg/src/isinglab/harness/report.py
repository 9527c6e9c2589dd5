"""Result persistence: provenance-stamped CSV/JSON and standalone SVG plots.

The CSV schema is fixed: comment lines carry provenance (seed, version),
then the header `experiment,L,replica,observable,value,sigma,config_hash`.
Values are emitted with full repr precision so a parsed table compares
equal to the in-memory one; a missing sigma is an empty field.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .experiments import ResultTable, Row

__all__ = [
    "CSV_HEADER",
    "table_to_csv",
    "table_from_csv",
    "table_to_json",
    "table_from_json",
    "emit_report",
]

CSV_HEADER = "experiment,L,replica,observable,value,sigma,config_hash"


# ---------------------------------------------------------------------------
# CSV / JSON round-trip
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def table_to_csv(table: ResultTable) -> str:
    lines = [
        f"# experiment: {table.experiment}",
        f"# seed: {table.seed}",
        f"# version: {table.version}",
        f"# config_hash: {table.config_hash}",
        CSV_HEADER,
    ]
    for L, rep, obs, value, sigma in table.rows:
        sig = "" if math.isnan(sigma) else _fmt(sigma)
        lines.append(f"{table.experiment},{L},{rep},{obs},"
                     f"{_fmt(value)},{sig},{table.config_hash}")
    return "\n".join(lines) + "\n"


def table_from_csv(text: str) -> ResultTable:
    meta: dict[str, str] = {}
    rows: list[Row] = []
    header_seen = False
    hashes: set[str] = set()
    experiment = ""
    for line in text.splitlines():
        if not line:
            continue
        if line.startswith("# "):
            key, _, val = line[2:].partition(": ")
            meta[key] = val
            continue
        if not header_seen:
            if line != CSV_HEADER:
                raise ValueError(f"unexpected CSV header: {line!r}")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 7:
            raise ValueError(f"malformed CSV row: {line!r}")
        exp, L, rep, obs, value, sigma, chash = parts
        experiment = exp
        hashes.add(chash)
        rows.append((int(L), int(rep), obs, float(value),
                     float(sigma) if sigma else float("nan")))
    if not header_seen:
        raise ValueError("CSV is missing its header line")
    if "config_hash" in meta:
        hashes.add(meta["config_hash"])
    if len(hashes) > 1:
        raise ValueError("rows carry inconsistent config hashes")
    chash = hashes.pop() if hashes else ""
    return ResultTable(experiment=meta.get("experiment", experiment),
                       seed=int(meta.get("seed", "0")),
                       version=meta.get("version", ""),
                       config_hash=chash, rows=rows)


def table_to_json(table: ResultTable) -> str:
    doc = {
        "experiment": table.experiment,
        "seed": table.seed,
        "version": table.version,
        "config_hash": table.config_hash,
        "rows": [
            {"L": L, "replica": rep, "observable": obs,
             "value": None if math.isnan(value) else value,
             "sigma": None if math.isnan(sigma) else sigma}
            for L, rep, obs, value, sigma in table.rows
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def table_from_json(text: str) -> ResultTable:
    doc = json.loads(text)
    rows: list[Row] = [
        (int(r["L"]), int(r["replica"]), r["observable"],
         float("nan") if r["value"] is None else float(r["value"]),
         float("nan") if r["sigma"] is None else float(r["sigma"]))
        for r in doc["rows"]
    ]
    return ResultTable(experiment=doc["experiment"], seed=int(doc["seed"]),
                       version=doc["version"],
                       config_hash=doc["config_hash"], rows=rows)


# ---------------------------------------------------------------------------
# SVG emission (pure text, no plotting dependency)
# ---------------------------------------------------------------------------

_W, _H, _M = 640, 400, 64


def _svg_points(title: str, xlabel: str,
                pts: list[tuple[float, float]]) -> str:
    body = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W/2:.0f}" y="24" text-anchor="middle" '
        f'font-family="monospace" font-size="14">{title}</text>',
        f'<line x1="{_M}" y1="{_H-_M}" x2="{_W-_M}" y2="{_H-_M}" '
        f'stroke="black"/>',
        f'<line x1="{_M}" y1="{_M}" x2="{_M}" y2="{_H-_M}" stroke="black"/>',
        f'<text x="{_W/2:.0f}" y="{_H-16}" text-anchor="middle" '
        f'font-family="monospace" font-size="12">{xlabel}</text>',
    ]
    finite = [(x, y) for x, y in pts if math.isfinite(x) and math.isfinite(y)]
    if finite:
        xs = [p[0] for p in finite]
        ys = [p[1] for p in finite]
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        xspan = (x1 - x0) or 1.0
        yspan = (y1 - y0) or 1.0

        def sx(x: float) -> float:
            return _M + (x - x0) / xspan * (_W - 2 * _M)

        def sy(y: float) -> float:
            return _H - _M - (y - y0) / yspan * (_H - 2 * _M)

        finite.sort()
        if len(finite) > 1:
            path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in finite)
            body.append(f'<polyline points="{path}" fill="none" '
                        f'stroke="steelblue" stroke-width="1.5"/>')
        for x, y in finite:
            body.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" '
                        f'fill="steelblue"/>')
        for val, px, py, anchor in (
                (x0, sx(x0), _H - _M + 16, "middle"),
                (x1, sx(x1), _H - _M + 16, "middle"),
                (y0, _M - 6, sy(y0) + 4, "end"),
                (y1, _M - 6, sy(y1) + 4, "end")):
            body.append(f'<text x="{px:.2f}" y="{py:.2f}" text-anchor="{anchor}" '
                        f'font-family="monospace" font-size="11">{val:.6g}</text>')
    else:
        body.append(f'<text x="{_W/2:.0f}" y="{_H/2:.0f}" text-anchor="middle" '
                    f'font-family="monospace" font-size="12">no data</text>')
    body.append("</svg>")
    return "\n".join(body) + "\n"


def _slug(name: str) -> str:
    return "".join(c if c.isalnum() else "-" for c in name).strip("-")


def _write(path: Path, content: str) -> None:
    try:
        path.write_text(content, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write report file {path}: {exc}") from exc


def emit_report(table: ResultTable, out_dir: str | Path = ".",
                format: str = "csv") -> list[Path]:
    """Write the table (CSV or JSON) plus one SVG per observable."""
    if format not in ("csv", "json"):
        raise ValueError("format must be 'csv' or 'json'")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    paths: list[Path] = []

    data_path = out / f"{table.experiment}.{format}"
    text = table_to_csv(table) if format == "csv" else table_to_json(table)
    _write(data_path, text)
    paths.append(data_path)

    observables = sorted({r[2] for r in table.rows})
    many_sizes = len(table.sizes()) > 1
    for obs in observables:
        picked = table.observable(obs)
        if many_sizes:
            pts = [(float(L), v) for L, _, _, v, _ in picked]
            xlabel = "L"
        else:
            pts = [(float(rep), v) for _, rep, _, v, _ in picked]
            xlabel = "replica / site"
        svg_path = out / f"{table.experiment}_{_slug(obs)}.svg"
        _write(svg_path, _svg_points(f"{table.experiment}: {obs}", xlabel, pts))
        paths.append(svg_path)
    return paths
