"""Audit reports for a solved instance.

Four views of the same optimum: the pricing table (is any point priced
above the line the portfolio implies?), slope tables between points (do the
difference quotients respect the norm bounds?), market-line scatter data,
and convergence summaries against an oracle objective. Reports are plain
data sorted by point id so repeated runs diff cleanly.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import measure as msr
from . import objective as obj
from .errors import BaseNotInIndex, InvariantViolation, RequiresOracle

_D_FLOOR = 1e-12


@dataclass(frozen=True)
class CapmRow:
    point_id: int
    label: Optional[str]
    psi: float
    mu_value: float
    beta: Optional[float]
    alpha_margin: Optional[float]
    in_index: bool


@dataclass(frozen=True)
class JcRow:
    x: int
    y: int
    d: float
    psi_slope: float
    mu_slope: float


@dataclass(frozen=True)
class SmlPoint:
    point_id: int
    x_coord: float
    y_coord: float
    classification: str


@dataclass(frozen=True)
class SmlReport:
    points: Tuple[SmlPoint, ...]
    slope: float
    intercept: float
    rate: float
    mu_norm: float
    objective: float


@dataclass(frozen=True)
class ConvergenceSummary:
    gaps: Tuple[float, ...]
    n_gap: Tuple[float, ...]
    sup_n_gap: float
    final_gap: float
    violation: bool


def _resolve_measure(result):
    return result if isinstance(result, msr.AtomicMeasure) else result.measure


def _tol_of(result, default=obj.DEFAULT_MARGIN_TOL):
    return getattr(result, "margin_tol", default)


def capm_report(result, kern, psi, K=None):
    """One pricing row per point of K.

    alpha is computed from the regression form psi(x) - r - beta(x) (excess),
    not copied from the margin; the two agreeing is part of what the report
    certifies. A riskless optimum (||mu|| = 0) leaves beta and alpha
    undefined; those rows carry None and in_index falls back to the margin.
    """
    measure = _resolve_measure(result)
    psi = obj.as_psi(psi, kern)
    tol = _tol_of(result)
    ids = sorted(int(k) for k in (range(kern.n) if K is None else K))
    iota = obj.margins(measure, psi, kern)
    riskless = msr.norm_sq(measure, kern) <= 1e-14
    rows = []
    for i in ids:
        mu_i = msr.mu_eval(measure, kern, i)
        if riskless:
            b = a = None
            member = abs(float(iota[i])) <= tol
        else:
            b = obj.beta(measure, kern, i)
            a = obj.alpha(measure, psi, kern, i)
            member = abs(a) <= tol
        rows.append(
            CapmRow(
                point_id=i,
                label=kern.points[i].label,
                psi=float(psi.values[i]),
                mu_value=mu_i,
                beta=b,
                alpha_margin=a,
                in_index=member,
            )
        )
    return rows


def jc_report(result, kern, psi, K=None, base_points=None):
    """Difference-quotient rows from index points to the ground set.

    For x in base_points and y in K with d(x,y) > 1e-12, emits
    (psi(y)-psi(x))/d and (mu(y)-mu(x))/d and asserts the slope chain:
    psi_slope <= mu_slope <= ||mu||, both within margin_tol. The lower bound
    -||psi|| is only checkable when psi comes in embedded form with a norm;
    a plain table leaves it unchecked. Violations raise, they do not warn.
    """
    measure = _resolve_measure(result)
    psi = obj.as_psi(psi, kern)
    tol = _tol_of(result)
    ids = sorted(int(k) for k in (range(kern.n) if K is None else K))
    iota = obj.margins(measure, psi, kern)
    if base_points is None:
        base_points = [i for i in ids if abs(float(iota[i])) <= tol]
    bases = sorted(int(b) for b in base_points)
    for b in bases:
        if abs(float(iota[b])) > tol:
            raise BaseNotInIndex(
                "point %d has margin %.3g; slope rows start from index points only"
                % (b, float(iota[b]))
            )
    mu_norm = math.sqrt(msr.norm_sq(measure, kern))
    rows = []
    for x in bases:
        mu_x = msr.mu_eval(measure, kern, x)
        for y in ids:
            d = kern.embed_distance(x, y)
            if d <= _D_FLOOR:
                continue
            psi_slope = (float(psi.values[y]) - float(psi.values[x])) / d
            mu_slope = (msr.mu_eval(measure, kern, y) - mu_x) / d
            if psi_slope > mu_slope + tol:
                raise InvariantViolation(
                    "slope chain broken at (%d,%d): psi %.17g > mu %.17g"
                    % (x, y, psi_slope, mu_slope)
                )
            if mu_slope > mu_norm + tol:
                raise InvariantViolation(
                    "slope chain broken at (%d,%d): mu %.17g > ||mu|| %.17g"
                    % (x, y, mu_slope, mu_norm)
                )
            if psi.norm is not None and psi_slope < -psi.norm - tol:
                raise InvariantViolation(
                    "slope chain broken at (%d,%d): psi %.17g < -||psi|| %.17g"
                    % (x, y, psi_slope, -psi.norm)
                )
            rows.append(JcRow(x=x, y=y, d=d, psi_slope=psi_slope, mu_slope=mu_slope))
    return rows


def sml_points(result, kern, psi, K=None, extras=()):
    """Scatter data in the (mu(y), psi(y)) plane with the slope-1 line.

    Index points sit on the line psi = mu + r within margin_tol, other
    K-points on or below it, extras wherever they land.
    """
    measure = _resolve_measure(result)
    psi = obj.as_psi(psi, kern)
    tol = _tol_of(result)
    ids = sorted(int(k) for k in (range(kern.n) if K is None else K))
    extra_ids = sorted(int(e) for e in extras)
    iota = obj.margins(measure, psi, kern)
    rate = obj.topiaric_rate(measure, psi, kern)
    pts = []
    for i in sorted(set(ids) | set(extra_ids)):
        if i in set(extra_ids) and i not in set(ids):
            cls = "outside-K"
        elif abs(float(iota[i])) <= tol:
            cls = "index"
        else:
            cls = "interior-of-K"
        pts.append(
            SmlPoint(
                point_id=i,
                x_coord=msr.mu_eval(measure, kern, i),
                y_coord=float(psi.values[i]),
                classification=cls,
            )
        )
    return SmlReport(
        points=tuple(pts),
        slope=1.0,
        intercept=rate,
        rate=rate,
        mu_norm=math.sqrt(msr.norm_sq(measure, kern)),
        objective=obj.aesthetic_objective(measure, psi, kern),
    )


def invisible_residual(result1, result2, kern):
    """||mu1 - mu2|| in the embedding."""
    return msr.embedded_distance(_resolve_measure(result1), _resolve_measure(result2), kern)


def convergence_summary(trace, oracle_objective):
    """Per-iteration optimality gaps and the running sup of n * gap_n.

    The violation flag fires when n * gap_n increases monotonically over the
    last half of the trace by more than a factor of two; a trajectory obeying
    an O(1/n) law keeps that product bounded.
    """
    if oracle_objective is None:
        raise RequiresOracle("convergence gaps need a reference objective")
    if not trace:
        raise RequiresOracle("empty trace; run the solver with trace enabled")
    gaps = tuple(float(oracle_objective) - row.objective for row in trace)
    n_gap = tuple(row.iteration * g for row, g in zip(trace, gaps))
    half = len(n_gap) // 2
    tail = n_gap[half:]
    violation = False
    if len(tail) >= 2:
        rising = all(b >= a - 1e-15 * max(1.0, abs(a)) for a, b in zip(tail, tail[1:]))
        violation = rising and tail[-1] > 2.0 * max(tail[0], 0.0) and tail[-1] > 0.0
    return ConvergenceSummary(
        gaps=gaps,
        n_gap=n_gap,
        sup_n_gap=float(max(n_gap)),
        final_gap=float(gaps[-1]),
        violation=violation,
    )
