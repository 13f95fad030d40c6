"""The objective, margin, rate, score, beta and alpha.

Everything here is a pure function of (measure, psi, kernel). The objective
being maximized is O(mu) = integral(psi d mu) - ||mu||^2 / 2 over probability
measures; the margin iota(x) = psi(x) - mu(x) - r is its directional
derivative toward delta_x, with r the rate integral(psi - mu) d mu. A
converged solution has margin zero on its support and nonpositive
everywhere else.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import measure as msr
from .errors import InvalidInput, ZeroPortfolio

DEFAULT_MARGIN_TOL = 1e-8

_ZERO_NORM_TOL = 1e-14


class PsiSpec:
    """Target values over the ground set.

    Derived forms (zero, embedded measure, point kernel) are materialized
    into a table once; candidates are finite so nothing is lost. The norm
    field is only known when psi itself is an embedded element, which is
    what makes the lower slope bound in the Julia-Carathéodory report
    checkable.
    """

    def __init__(self, values, form="table", norm=None):
        self.values = np.asarray(values, dtype=float)
        if self.values.ndim != 1:
            raise InvalidInput("psi must be a flat table of per-point values")
        if not np.isfinite(self.values).all():
            raise InvalidInput("psi contains non-finite values")
        self.form = form
        self.norm = None if norm is None else float(norm)

    @staticmethod
    def table(values):
        return PsiSpec(values, "table")

    @staticmethod
    def zero(kern):
        return PsiSpec(np.zeros(kern.n), "zero", norm=0.0)

    @staticmethod
    def embedded(reference, kern):
        """psi(x) = nu(x) for a measure nu; ||psi|| = ||nu|| is known."""
        vals = np.array([msr.mu_eval(reference, kern, i) for i in range(kern.n)])
        return PsiSpec(vals, "embedded", norm=np.sqrt(msr.norm_sq(reference, kern)))

    @staticmethod
    def point_kernel(alpha, kern):
        """psi(x) = k(alpha, x); the ||mu - delta_alpha|| objective."""
        vals = kern.row(alpha)
        return PsiSpec(vals, "point-kernel", norm=np.sqrt(max(0.0, kern.eval(alpha, alpha))))

    def __len__(self):
        return len(self.values)


def as_psi(psi, kern):
    if isinstance(psi, PsiSpec):
        spec = psi
    elif psi is None:
        spec = PsiSpec.zero(kern)
    else:
        spec = PsiSpec.table(psi)
    if len(spec) != kern.n:
        raise InvalidInput(
            "psi has %d values for %d ground points" % (len(spec), kern.n)
        )
    return spec


def aesthetic_objective(measure, psi, kern):
    psi = as_psi(psi, kern)
    lin = float(np.dot(measure.weights, psi.values[measure.ids])) if measure.atoms else 0.0
    return lin - msr.norm_sq(measure, kern) / 2.0


def topiaric_rate(measure, psi, kern):
    """r = integral(psi - mu) d mu = integral(psi d mu) - ||mu||^2."""
    psi = as_psi(psi, kern)
    lin = float(np.dot(measure.weights, psi.values[measure.ids])) if measure.atoms else 0.0
    return lin - msr.norm_sq(measure, kern)


def margin(measure, psi, kern, x):
    psi = as_psi(psi, kern)
    return float(psi.values[int(x)]) - msr.mu_eval(measure, kern, int(x)) - topiaric_rate(
        measure, psi, kern
    )


def margins(measure, psi, kern):
    """Margin vector over the whole ground set."""
    psi = as_psi(psi, kern)
    mu_vals = kern.gram[:, measure.ids] @ measure.weights
    return psi.values - mu_vals - topiaric_rate(measure, psi, kern)


def score(measure, psi, kern, candidates=None):
    """(sup margin, argmax id). Ties at the max margin go to the candidate
    with the larger step gain iota^2 / (2 ||k_x - mu||^2), then lowest id."""
    psi = as_psi(psi, kern)
    iota = margins(measure, psi, kern)
    if candidates is None:
        cand = np.arange(kern.n)
    else:
        cand = np.asarray(sorted(candidates), dtype=int)
        if cand.size == 0:
            raise InvalidInput("score needs a non-empty candidate set")
    vals = iota[cand]
    best = float(vals.max())
    tied = cand[vals == best]
    if tied.size == 1:
        return best, int(tied[0])
    gains = np.array([step_gain(measure, psi, kern, int(x)) for x in tied])
    return best, int(tied[int(np.argmax(gains))])


def step_gain(measure, psi, kern, x):
    """Objective gain of an exact line search toward delta_x."""
    iota = margin(measure, psi, kern, x)
    d2 = kern.gram[x, x] - 2.0 * msr.mu_eval(measure, kern, x) + msr.norm_sq(measure, kern)
    if d2 <= _ZERO_NORM_TOL:
        # direction has no length; an actual step here is an error the
        # solver raises, but for ranking purposes the gain is unbounded
        return np.inf if iota > 0 else 0.0
    t = min(1.0, max(0.0, iota / d2))
    # closed form iota^2/(2 d2) only valid for interior t
    return iota * t - d2 * t * t / 2.0


def beta(measure, kern, x):
    """mu(x) / ||mu||^2, the regression coefficient of x on the portfolio."""
    ns = msr.norm_sq(measure, kern)
    if ns <= _ZERO_NORM_TOL:
        raise ZeroPortfolio("portfolio embeds to zero; beta undefined")
    return msr.mu_eval(measure, kern, int(x)) / ns


def alpha(measure, psi, kern, x):
    """psi(x) - r - beta(x) (integral(psi d mu) - r).

    Algebraically identical to the margin because the excess
    integral(psi d mu) - r equals ||mu||^2; both formulas are kept and the
    identity is asserted by tests rather than assumed.
    """
    psi = as_psi(psi, kern)
    r = topiaric_rate(measure, psi, kern)
    lin = float(np.dot(measure.weights, psi.values[measure.ids]))
    return float(psi.values[int(x)]) - r - beta(measure, kern, x) * (lin - r)


@dataclass(frozen=True)
class MarginTable:
    margins: np.ndarray
    rate: float
    score: float
    objective: float
    norm_sq: float
    argmax: int


def margin_table(measure, psi, kern, candidates=None):
    psi = as_psi(psi, kern)
    iota = margins(measure, psi, kern)
    s, arg = score(measure, psi, kern, candidates)
    return MarginTable(
        margins=iota,
        rate=topiaric_rate(measure, psi, kern),
        score=s,
        objective=aesthetic_objective(measure, psi, kern),
        norm_sq=msr.norm_sq(measure, kern),
        argmax=arg,
    )
