"""Deterministic file I/O: JSON/CSV writers, mask and PGM codecs.

Two hard requirements hold for every writer here: identical inputs produce
byte-identical output (floats at 17 significant digits, fixed key and row
orders, bare "\\n" line endings) and files land atomically (temp file in
the target directory, then rename). Readers are strict; malformed input is
an InvalidInput with coordinates, never a silent repair.
"""

import csv
import io
import json
import math
import os
import tempfile

import numpy as np

from .errors import InvalidInput
from . import kernel as krn
from . import measure as msr
from . import objective as obj
from . import portfolio as pf

FORMAT_VERSION = 1


# -- float and JSON rendering ----------------------------------------------

def fmt(x):
    """17 significant digits; enough to round-trip a double exactly."""
    x = float(x)
    if not math.isfinite(x):
        raise InvalidInput("non-finite value %r in output" % x)
    return format(x, ".17g")


def _render(value, indent):
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt(value)
    if isinstance(value, dict):
        if not value:
            return "{}"
        pad = " " * (indent + 2)
        items = (
            "%s%s: %s" % (pad, json.dumps(str(k)), _render(v, indent + 2))
            for k, v in value.items()
        )
        return "{\n%s\n%s}" % (",\n".join(items), " " * indent)
    if isinstance(value, (list, tuple, np.ndarray)):
        items = [_render(v, indent + 2) for v in value]
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in value):
            return "[%s]" % ", ".join(items)
        pad = " " * (indent + 2)
        return "[\n%s\n%s]" % (",\n".join(pad + it for it in items), " " * indent)
    raise InvalidInput("cannot serialize %r" % type(value).__name__)


def json_dumps(payload):
    """Pretty JSON with deterministic float text and key order as given."""
    return _render(payload, 0) + "\n"


# -- atomic writes ----------------------------------------------------------

def atomic_write_bytes(path, data):
    """Write via a sibling temp file and rename; no torn output on crash."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_text(path, text):
    atomic_write_bytes(path, text.encode("utf-8"))


def write_json(path, payload):
    atomic_write_text(path, json_dumps(payload))


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except (OSError, UnicodeDecodeError) as exc:
        raise InvalidInput("cannot read %s: %s" % (path, exc))
    except json.JSONDecodeError as exc:
        raise InvalidInput("%s is not valid JSON: %s" % (path, exc))
    if not isinstance(payload, dict):
        raise InvalidInput("%s: top level must be a JSON object" % path)
    version = payload.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise InvalidInput(
            "%s: format_version %r is not supported (expected %d)"
            % (path, version, FORMAT_VERSION)
        )
    return payload


# -- problem JSON ------------------------------------------------------------

_VARIANT_TO_TYPE = {
    "explicit-gram": "gram",
    "euclidean": "euclidean",
    "fock": "fock",
    "hardy": "hardy",
}


def _coord_pairs(kern):
    coords = kern.coords
    if kern.variant == "euclidean":
        return [[float(c) for c in row] for row in np.atleast_2d(coords)]
    return [[float(z.real), float(z.imag)] for z in coords]


def problem_payload(kern, psi=None):
    block = {"type": _VARIANT_TO_TYPE[kern.variant]}
    if kern.variant == "explicit-gram":
        block["gram"] = [[float(v) for v in row] for row in kern.gram]
    else:
        block["points"] = _coord_pairs(kern)
    labels = kern.labels()
    if any(lab is not None for lab in labels):
        block["labels"] = labels
    psi = obj.as_psi(psi, kern)
    return {
        "format_version": FORMAT_VERSION,
        "kernel": block,
        "psi": [float(v) for v in psi.values],
    }


def write_problem(path, kern, psi=None):
    write_json(path, problem_payload(kern, psi))


def _parse_points(raw, to_complex):
    pts = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, (list, tuple)) or not entry:
            raise InvalidInput("kernel point %d must be a coordinate list" % i)
        if to_complex:
            if len(entry) != 2:
                raise InvalidInput("kernel point %d needs [re, im]" % i)
            pts.append(complex(float(entry[0]), float(entry[1])))
        else:
            pts.append([float(v) for v in entry])
    return pts


def read_problem(path):
    """Load a problem file, returning (Kernel, PsiSpec)."""
    payload = _load_json(path)
    block = payload.get("kernel")
    if not isinstance(block, dict):
        raise InvalidInput("%s: missing kernel object" % path)
    ktype = block.get("type")
    labels = block.get("labels")
    if ktype == "gram":
        gram = block.get("gram")
        if gram is None:
            raise InvalidInput("%s: gram kernel needs a gram matrix" % path)
        kern = krn.explicit_gram(gram, labels=labels)
    elif ktype in ("euclidean", "fock", "hardy"):
        raw = block.get("points")
        if raw is None:
            raise InvalidInput("%s: %s kernel needs points" % (path, ktype))
        pts = _parse_points(raw, to_complex=ktype != "euclidean")
        kern = getattr(krn, ktype)(pts, labels=labels)
    else:
        raise InvalidInput("%s: unknown kernel type %r" % (path, ktype))
    values = payload.get("psi")
    if values is None:
        psi = obj.PsiSpec.zero(kern)
    else:
        if not isinstance(values, list) or len(values) != kern.n:
            raise InvalidInput(
                "%s: psi must list one value per point (%d)" % (path, kern.n)
            )
        psi = obj.PsiSpec.table([float(v) for v in values])
    return kern, psi


# -- measure JSON ------------------------------------------------------------

def measure_payload(measure):
    atoms = sorted(measure.atoms)
    return {
        "format_version": FORMAT_VERSION,
        "kind": measure.kind,
        "atoms": [{"point": i, "weight": w} for i, w in atoms],
    }


def write_measure(path, measure):
    write_json(path, measure_payload(measure))


def read_measure(path):
    payload = _load_json(path)
    raw = payload.get("atoms")
    if not isinstance(raw, list):
        raise InvalidInput("%s: missing atoms list" % path)
    atoms = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict) or "point" not in entry or "weight" not in entry:
            raise InvalidInput("%s: atom %d needs point and weight" % (path, i))
        atoms.append((int(entry["point"]), float(entry["weight"])))
    kind = payload.get("kind", msr.PROBABILITY)
    return msr.AtomicMeasure(tuple(atoms), kind=kind)


# -- result JSON -------------------------------------------------------------

def _weight_entries(measure, labels):
    entries = sorted(measure.atoms, key=lambda iw: (-iw[1], iw[0]))
    return [
        {"point": i, "label": labels[i] if labels else None, "weight": w}
        for i, w in entries
    ]


def result_payload(result, kern):
    return {
        "format_version": FORMAT_VERSION,
        "weights": _weight_entries(result.measure, kern.labels()),
        "objective": result.objective,
        "rate": result.rate,
        "score": result.score,
        "index": [int(i) for i in result.index],
        "iterations": result.iterations,
        "algorithm": result.algorithm,
    }


def write_result(path, result, kern):
    write_json(path, result_payload(result, kern))


# -- CSV helpers -------------------------------------------------------------

def _cell(value):
    if value is None:
        return ""
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, (float, np.floating)):
        return fmt(value)
    return str(value)


def _csv_text(header, rows, preamble=None):
    out = io.StringIO()
    if preamble:
        out.write(preamble)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return out.getvalue()


def trace_csv(trace):
    rows = (
        (
            row.iteration,
            row.objective,
            row.score,
            row.support_size,
            "" if row.added_point is None else row.added_point,
            ";".join(str(i) for i in row.dropped_points),
        )
        for row in trace
    )
    return _csv_text(
        ("iteration", "objective", "score", "support_size", "added_point", "dropped_points"),
        rows,
    )


def write_trace(path, trace):
    atomic_write_text(path, trace_csv(trace))


def margin_csv(measure, psi, kern):
    """Full margin table: every ground point with its CAPM coordinates."""
    psi = obj.as_psi(psi, kern)
    labels = kern.labels()
    nsq = msr.norm_sq(measure, kern)
    riskless = nsq <= 1e-14
    rows = []
    for i in range(kern.n):
        mu_i = msr.mu_eval(measure, kern, i)
        rows.append(
            (
                i,
                "" if labels[i] is None else labels[i],
                float(psi.values[i]),
                mu_i,
                obj.margin(measure, psi, kern, i),
                None if riskless else obj.beta(measure, kern, i),
                None if riskless else obj.alpha(measure, psi, kern, i),
            )
        )
    return _csv_text(("point", "label", "psi", "mu", "margin", "beta", "alpha"), rows)


def capm_csv(rows):
    data = (
        (
            row.point_id,
            "" if row.label is None else row.label,
            row.psi,
            row.mu_value,
            row.beta,
            row.alpha_margin,
            row.in_index,
        )
        for row in rows
    )
    return _csv_text(("id", "label", "psi", "mu", "beta", "alpha", "in_index"), data)


def jc_csv(rows):
    data = ((r.x, r.y, r.d, r.psi_slope, r.mu_slope) for r in rows)
    return _csv_text(("x", "y", "d", "psi_slope", "mu_slope"), data)


def sml_csv(report):
    header = json.dumps(
        {
            "format_version": FORMAT_VERSION,
            "rate": float(report.rate),
            "mu_norm": float(report.mu_norm),
            "objective": float(report.objective),
        }
    )
    data = (
        (p.point_id, p.x_coord, p.y_coord, p.classification) for p in report.points
    )
    return _csv_text(("id", "mu", "psi", "class"), data, preamble="# %s\n" % header)


# -- portfolio ----------------------------------------------------------------

def portfolio_spec_payload(spec):
    return {
        "format_version": FORMAT_VERSION,
        "labels": list(spec.labels),
        "mean": [float(v) for v in spec.mean],
        "covariance": [[float(v) for v in row] for row in spec.covariance],
        "risk_free_rate": spec.risk_free_rate,
        "mean_shrink": spec.mean_shrink,
        "var_inflate": spec.var_inflate,
        "annualize_factor": spec.annualize_factor,
        "rf_index": spec.rf_index,
        "reference": None
        if spec.reference is None
        else measure_payload(spec.reference)["atoms"],
    }


def read_portfolio_spec(path):
    payload = _load_json(path)
    for key in ("labels", "mean", "covariance"):
        if key not in payload:
            raise InvalidInput("%s: portfolio spec needs %r" % (path, key))
    reference = payload.get("reference")
    if reference is not None:
        atoms = tuple((int(a["point"]), float(a["weight"])) for a in reference)
        reference = msr.AtomicMeasure(atoms)
    kwargs = {}
    for key in ("risk_free_rate", "mean_shrink", "var_inflate"):
        if payload.get(key) is not None:
            kwargs[key] = float(payload[key])
    if payload.get("annualize_factor") is not None:
        kwargs["annualize_factor"] = int(payload["annualize_factor"])
    if payload.get("rf_index") is not None:
        kwargs["rf_index"] = int(payload["rf_index"])
    return pf.PortfolioSpec(
        labels=tuple(str(v) for v in payload["labels"]),
        mean=payload["mean"],
        covariance=payload["covariance"],
        reference=reference,
        **kwargs,
    )


def portfolio_payload(report):
    spec_echo = portfolio_spec_payload(report.spec)
    del spec_echo["format_version"]
    return {
        "format_version": FORMAT_VERSION,
        "spec": spec_echo,
        "corrections": {
            "mean_shrink": report.corrections[0],
            "var_inflate": report.corrections[1],
            "flagged": [int(i) for i in report.flagged],
        },
        "weights": [
            {"label": label, "point": i, "weight": w}
            for label, i, w in report.weights
        ],
        "rate": report.rate,
        "variance": report.variance,
        "objective": report.result.objective,
        "score": report.result.score,
        "iterations": report.result.iterations,
        "algorithm": report.result.algorithm,
        "adaptive_constant": report.adaptive_constant,
    }


def write_portfolio(path, report):
    write_json(path, portfolio_payload(report))


def read_returns(path):
    """returns.csv: header of labels, then one row of decimals per period.

    Cells stay raw; ingest_returns owns numeric validation so its errors
    carry file coordinates.
    """
    try:
        with open(path, "r", encoding="utf-8", newline="") as handle:
            rows = [row for row in csv.reader(handle) if row]
    except (OSError, UnicodeDecodeError) as exc:
        raise InvalidInput("cannot read %s: %s" % (path, exc))
    if not rows:
        raise InvalidInput("%s: empty returns file" % path)
    labels = tuple(cell.strip() for cell in rows[0])
    if any(not lab for lab in labels):
        raise InvalidInput("%s: blank label in header" % path)
    body = tuple(tuple(cell.strip() for cell in row) for row in rows[1:])
    return pf.ReturnsTable(labels=labels, rows=body)


# -- maze artifacts ------------------------------------------------------------

def read_mask(path):
    """Obstacle mask from a '#'/'.' grid or a P1 PBM (1 = obstacle)."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise InvalidInput("cannot read %s: %s" % (path, exc))
    lines = [ln.rstrip() for ln in text.splitlines()]
    stripped = [ln for ln in lines if ln.strip()]
    if not stripped:
        raise InvalidInput("%s: empty mask file" % path)
    if stripped[0].strip() == "P1":
        return _read_pbm(path, text)
    rows = []
    width = None
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        cells = line.strip()
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise InvalidInput(
                "%s: line %d has %d cells, expected %d"
                % (path, lineno, len(cells), width)
            )
        row = []
        for col, ch in enumerate(cells):
            if ch == "#":
                row.append(True)
            elif ch == ".":
                row.append(False)
            else:
                raise InvalidInput(
                    "%s: line %d column %d: %r is not '#' or '.'"
                    % (path, lineno, col + 1, ch)
                )
        rows.append(row)
    return np.array(rows, dtype=bool)


def _read_pbm(path, text):
    tokens = []
    for line in text.splitlines():
        body = line.split("#", 1)[0]
        tokens.extend(body.split())
    if not tokens or tokens[0] != "P1":
        raise InvalidInput("%s: not a P1 PBM" % path)
    try:
        width, height = int(tokens[1]), int(tokens[2])
        bits = [int(t) for t in tokens[3:]]
    except (IndexError, ValueError):
        raise InvalidInput("%s: malformed PBM header or bitmap" % path)
    if len(bits) != width * height or any(b not in (0, 1) for b in bits):
        raise InvalidInput(
            "%s: PBM needs %d binary cells, got %d" % (path, width * height, len(bits))
        )
    return np.array(bits, dtype=bool).reshape(height, width)


def pgm_text(raster):
    """P2 PGM, maxval 255, top raster row first, lines kept within 70 chars."""
    raster = np.asarray(raster)
    if raster.ndim != 2:
        raise InvalidInput("PGM raster must be 2-D")
    height, width = raster.shape
    flat = [str(int(v)) for v in raster.reshape(-1)]
    lines = ["P2", "%d %d" % (width, height), "255"]
    for start in range(0, len(flat), 17):
        lines.append(" ".join(flat[start:start + 17]))
    return "\n".join(lines) + "\n"


def write_pgm(path, raster):
    atomic_write_text(path, pgm_text(raster))


def path_csv(trace):
    """Path CSV: x,y per step, terminal comment line carrying the status."""
    rows = ((float(z.real), float(z.imag)) for z in trace.points)
    body = _csv_text(("x", "y"), rows)
    return body + "# status: %s\n" % trace.status


def write_path(path, trace):
    atomic_write_text(path, path_csv(trace))


def maze_payload(mres, trace=None):
    res = mres.result
    return {
        "format_version": FORMAT_VERSION,
        "rescale_factor": mres.scale,
        "escape_radius": mres.escape_radius,
        "trichotomy": mres.trichotomy,
        "cells": len(mres.points),
        "support_size": len(res.support()),
        "objective": res.objective,
        "rate": res.rate,
        "score": res.score,
        "iterations": res.iterations,
        "status": None if trace is None else trace.status,
        "clearance": None if trace is None else trace.clearance,
        "steps": None if trace is None else len(trace.points),
    }
