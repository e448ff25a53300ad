"""Incident CSV, ESRI ASCII grid and PAI/report CSV formats.

Calendar handling lives here only: ISO-8601 timestamps become fractional
days since the earliest calendar date in the file.
"""
from __future__ import annotations

import calendar
import csv
import datetime as dt
import io as _io
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .domain import GridSpec2D, Incident, LandUse, LandUseGrid, ValidationError
from .evaluation import ComparisonRow, CurvePoint, PAICurve, consolidate_curves

log = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

INCIDENT_HEADER = ["id", "x", "y", "t"]
PAI_HEADER = ["method", "group", "area_pct", "hotspot_cells", "hit_rate", "pai", "feasible"]
COMPARISON_HEADER = ["scope", "area_pct", "test", "methods", "statistic", "df1", "df2", "p_value"]
NODATA = -9999


class DataFormatError(ValidationError):
    """Malformed input file."""


class MissingHeaderError(DataFormatError):
    pass


class DuplicateIdError(DataFormatError):
    pass


class NoValidRowsError(DataFormatError):
    pass


class AsciiGridError(DataFormatError):
    pass


def atomic_write_text(path: PathLike, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt_float(v: float) -> str:
    return format(float(v), ".17g")


# ---------------------------------------------------------------- incidents

def _parse_time(raw: str):
    try:
        return float(raw)
    except ValueError:
        pass
    when = dt.datetime.fromisoformat(raw.strip())
    if when.tzinfo is not None:
        when = when.astimezone(dt.timezone.utc).replace(tzinfo=None)
    return when


def read_incidents_csv(path: PathLike) -> Tuple[List[Incident], Optional[dt.date]]:
    """Parse ``id,x,y,t`` rows.

    Returns the incidents and the epoch: the earliest calendar date when
    ``t`` holds ISO-8601 values, ``None`` when ``t`` is already in days.
    Unparseable rows are skipped with a warning that lists their line numbers.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != INCIDENT_HEADER:
            raise MissingHeaderError(f"{path}: expected header 'id,x,y,t', got {header!r}")
        rows = []
        bad = []
        kind = None
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                if len(row) != 4:
                    raise ValueError("wrong field count")
                rid = row[0].strip()
                x, y = float(row[1]), float(row[2])
                t = _parse_time(row[3])
                this = "days" if isinstance(t, float) else "calendar"
                kind = kind or this
                if not rid or this != kind or not (math.isfinite(x) and math.isfinite(y)):
                    raise ValueError("inconsistent row")
                if isinstance(t, float) and not math.isfinite(t):
                    raise ValueError("non-finite time")
            except ValueError:
                bad.append(lineno)
                continue
            rows.append((lineno, rid, x, y, t))
    if bad:
        log.warning("%s: skipped unparseable rows at lines %s", path, ", ".join(map(str, bad)))
    if not rows:
        raise NoValidRowsError(f"{path}: no valid incident rows")
    seen = {}
    for lineno, rid, *_ in rows:
        if rid in seen:
            raise DuplicateIdError(f"{path}: duplicate incident id {rid!r} at lines {seen[rid]} and {lineno}")
        seen[rid] = lineno
    epoch = None
    if kind == "calendar":
        epoch = min(r[4] for r in rows).date()
        start = dt.datetime.combine(epoch, dt.time())
        incidents = [Incident(rid, x, y, (t - start).total_seconds() / 86400.0) for _, rid, x, y, t in rows]
    else:
        incidents = [Incident(rid, x, y, t) for _, rid, x, y, t in rows]
    return incidents, epoch


def write_incidents_csv(incidents: Sequence[Incident], path: PathLike, epoch: Optional[dt.date] = None) -> None:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(INCIDENT_HEADER)
    start = dt.datetime.combine(epoch, dt.time()) if epoch is not None else None
    for inc in incidents:
        t = fmt_float(inc.t) if start is None else (start + dt.timedelta(days=inc.t)).isoformat()
        w.writerow([inc.id, fmt_float(inc.x), fmt_float(inc.y), t])
    atomic_write_text(path, buf.getvalue())


def to_day(value: str, epoch: Optional[dt.date]) -> float:
    """A CLI time argument (ISO date or plain number) on the day axis."""
    try:
        return float(value)
    except ValueError:
        pass
    if epoch is None:
        raise ValidationError(f"calendar time {value!r} given but the incidents use plain day numbers")
    when = dt.datetime.fromisoformat(value)
    return (when - dt.datetime.combine(epoch, dt.time())).total_seconds() / 86400.0


def months_before(day: dt.date, months: int) -> dt.date:
    y, m = divmod(day.year * 12 + (day.month - 1) - months, 12)
    return dt.date(y, m + 1, min(day.day, calendar.monthrange(y, m + 1)[1]))


def calendar_training_lengths(epoch: dt.date, forecast_starts: Sequence[float], months: int = 1) -> List[float]:
    """Length in days of the calendar ``months`` preceding each forecast start."""
    out = []
    for start in forecast_starts:
        when = dt.datetime.combine(epoch, dt.time()) + dt.timedelta(days=start)
        prior = dt.datetime.combine(months_before(when.date(), months), when.time())
        out.append((when - prior).total_seconds() / 86400.0)
    return out


# ---------------------------------------------------------------- ascii grids

_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")


def write_ascii_grid(path: PathLike, spec: GridSpec2D, values: np.ndarray, nodata: float = NODATA,
                     integer: bool = False) -> None:
    """Write an ``(n_cols, n_rows)`` raster; NaN cells become NODATA."""
    values = np.asarray(values, dtype=float)
    if values.shape != spec.shape:
        raise ValidationError(f"raster shape {values.shape} does not match grid {spec.shape}")
    nd = str(int(nodata)) if float(nodata).is_integer() else fmt_float(nodata)
    lines = [f"ncols {spec.n_cols}", f"nrows {spec.n_rows}", f"xllcorner {fmt_float(spec.x_origin)}",
             f"yllcorner {fmt_float(spec.y_origin)}", f"cellsize {fmt_float(spec.cell_size)}",
             f"NODATA_value {nd}"]
    for j in range(spec.n_rows - 1, -1, -1):
        col = values[:, j]
        if integer:
            cells = [nd if math.isnan(v) else str(int(v)) for v in col]
        else:
            cells = [nd if math.isnan(v) else fmt_float(v) for v in col]
        lines.append(" ".join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_ascii_grid(path: PathLike) -> Tuple[GridSpec2D, np.ndarray, float]:
    """Read a raster as ``(spec, values[n_cols, n_rows], nodata)``; NODATA -> NaN."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    header: Dict[str, str] = {}
    for lineno in range(1, 7):
        if lineno > len(lines):
            raise AsciiGridError(f"{path}: line {lineno}: header truncated")
        parts = lines[lineno - 1].split()
        key = parts[0].lower() if parts else ""
        if len(parts) != 2 or key not in _HEADER_KEYS + ("xllcenter", "yllcenter"):
            raise AsciiGridError(f"{path}: line {lineno}: malformed header line {lines[lineno - 1]!r}")
        header[key] = parts[1]
    try:
        n_cols, n_rows = int(header["ncols"]), int(header["nrows"])
        cell = float(header["cellsize"])
        nodata = float(header["nodata_value"])
        if "xllcorner" in header:
            x0, y0 = float(header["xllcorner"]), float(header["yllcorner"])
        else:
            x0 = float(header["xllcenter"]) - cell / 2
            y0 = float(header["yllcenter"]) - cell / 2
    except (KeyError, ValueError) as exc:
        raise AsciiGridError(f"{path}: incomplete or invalid header ({exc})") from None
    spec = GridSpec2D(x0, y0, cell, n_cols, n_rows)
    body = [(n, ln) for n, ln in enumerate(lines[6:], start=7) if ln.strip()]
    if len(body) != n_rows:
        where = body[n_rows][0] if len(body) > n_rows else len(lines) + 1
        raise AsciiGridError(f"{path}: line {where}: expected {n_rows} data rows, found {len(body)}")
    values = np.empty(spec.shape)
    for r, (lineno, ln) in enumerate(body):
        parts = ln.split()
        if len(parts) != n_cols:
            raise AsciiGridError(f"{path}: line {lineno}: expected {n_cols} values, found {len(parts)}")
        try:
            row = np.array([float(p) for p in parts])
        except ValueError:
            raise AsciiGridError(f"{path}: line {lineno}: non-numeric value") from None
        values[:, n_rows - 1 - r] = row
    values[values == nodata] = np.nan
    return spec, values, nodata


def write_landuse(path: PathLike, land_use: LandUseGrid) -> None:
    vals = land_use.classes.astype(float)
    vals[land_use.classes == LandUse.OUTSIDE] = np.nan
    write_ascii_grid(path, land_use.spec, vals, integer=True)


def read_landuse(path: PathLike) -> LandUseGrid:
    spec, values, _ = read_ascii_grid(path)
    classes = np.full(spec.shape, LandUse.OUTSIDE, dtype=np.int8)
    known = ~np.isnan(values)
    if not np.isin(values[known], (0, 1)).all():
        raise AsciiGridError(f"{path}: land-use cells must be 0, 1 or NODATA")
    classes[known] = values[known].astype(np.int8)
    return LandUseGrid(spec, classes)


def write_mask(path: PathLike, spec: GridSpec2D, mask: np.ndarray, land_use: Optional[LandUseGrid] = None) -> None:
    vals = np.asarray(mask, dtype=float)
    if land_use is not None:
        vals = np.where(land_use.in_study, vals, np.nan)
    write_ascii_grid(path, spec, vals, integer=True)


def write_volume_slices(directory: PathLike, volume, prefix: str = "density") -> List[Path]:
    """One grid per time bin, named ``<prefix>_t<k>.asc``."""
    directory = Path(directory)
    paths = []
    for k in range(volume.spec.n_bins):
        p = directory / f"{prefix}_t{k}.asc"
        write_ascii_grid(p, volume.spec.spatial, volume.values[:, :, k])
        paths.append(p)
    return paths


# ---------------------------------------------------------------- PAI / report CSVs

def _pct(v: float) -> str:
    return format(float(v), ".10g")


def _curve_rows(method: str, group: str, curve: PAICurve):
    for p in curve.points:
        yield [method, group, _pct(p.area_pct), str(p.hotspot_cells),
               fmt_float(p.hit_rate) if p.feasible else "",
               fmt_float(p.pai) if p.feasible else "",
               "true" if p.feasible else "false"]


def write_pai_csv(curves: Mapping[str, Sequence[PAICurve]], path: PathLike) -> None:
    """Per-group curves followed by the consolidated ``mean`` curve, per method."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PAI_HEADER)
    for method, group_curves in curves.items():
        for g, curve in enumerate(group_curves, start=1):
            w.writerows(_curve_rows(method, str(g), curve))
        w.writerows(_curve_rows(method, "mean", consolidate_curves(group_curves)))
    atomic_write_text(path, buf.getvalue())


def read_pai_csv(path: PathLike) -> Dict[str, List[PAICurve]]:
    """Per-group curves by method (consolidated rows are recomputed, not read)."""
    points: Dict[str, Dict[int, List[CurvePoint]]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != PAI_HEADER:
            raise MissingHeaderError(f"{path}: expected header {','.join(PAI_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(PAI_HEADER):
                raise DataFormatError(f"{path}: line {lineno}: expected {len(PAI_HEADER)} fields")
            method, group, pct, cells, hr, pv, feas = row
            if group == "mean":
                continue
            try:
                feasible = feas == "true"
                pt = CurvePoint(float(pct), int(cells), float(hr) if feasible else None,
                                float(pv) if feasible else None, feasible)
                points.setdefault(method, {}).setdefault(int(group), []).append(pt)
            except ValueError:
                raise DataFormatError(f"{path}: line {lineno}: malformed row") from None
    return {m: [PAICurve(tuple(g[k])) for k in sorted(g)] for m, g in points.items()}


def _opt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return fmt_float(v) if isinstance(v, float) else str(v)


def write_comparison_csv(rows: Sequence[ComparisonRow], path: PathLike) -> None:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPARISON_HEADER)
    for r in rows:
        w.writerow([r.scope, "" if r.area_pct is None else _pct(r.area_pct), r.test, "|".join(r.methods),
                    _opt(float(r.statistic)), _opt(r.df1), _opt(r.df2),
                    "" if r.p_value is None else _opt(float(r.p_value))])
    atomic_write_text(path, buf.getvalue())
