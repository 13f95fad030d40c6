"""Finitely supported measures on a kernel ground set.

Probability measures carry the candidate solutions; signed measures carry
hedges. Atoms reference ground points by id. Measures are immutable values,
every operation returns a new one.
"""

from dataclasses import dataclass
from typing import Tuple
import warnings

import numpy as np

from .errors import AtomRescueWarning, InvalidInput, TOutOfRange

PROBABILITY = "probability"
SIGNED = "signed"

_MASS_TOL = 1e-12


@dataclass(frozen=True)
class AtomicMeasure:
    atoms: Tuple[Tuple[int, float], ...]
    kind: str = PROBABILITY

    def __post_init__(self):
        if self.kind not in (PROBABILITY, SIGNED):
            raise InvalidInput("measure kind must be probability or signed")
        atoms = tuple((int(i), float(w)) for i, w in self.atoms)
        ids = [i for i, _ in atoms]
        if len(set(ids)) != len(ids):
            raise InvalidInput("measure atoms repeat a point id")
        if self.kind == PROBABILITY:
            if not atoms:
                raise InvalidInput("probability measure needs at least one atom")
            ws = np.array([w for _, w in atoms])
            if ws.min(initial=0.0) < -_MASS_TOL:
                raise InvalidInput(
                    "probability measure has negative weight %g" % ws.min()
                )
            if abs(ws.sum() - 1.0) > 1e-9:
                raise InvalidInput(
                    "probability weights sum to %.17g, not 1" % ws.sum()
                )
        object.__setattr__(self, "atoms", atoms)

    @property
    def ids(self):
        return np.array([i for i, _ in self.atoms], dtype=int)

    @property
    def weights(self):
        return np.array([w for _, w in self.atoms], dtype=float)

    def total_mass(self):
        return float(sum(w for _, w in self.atoms))

    def support(self):
        """Ids carrying nonzero weight, ascending."""
        return tuple(sorted(i for i, w in self.atoms if w != 0.0))

    def weight_of(self, point_id):
        for i, w in self.atoms:
            if i == point_id:
                return w
        return 0.0

    def as_vector(self, n):
        v = np.zeros(n)
        for i, w in self.atoms:
            if not 0 <= i < n:
                raise InvalidInput("atom id %d outside ground set of size %d" % (i, n))
            v[i] = w
        return v


def delta(point_id):
    return AtomicMeasure(((point_id, 1.0),), PROBABILITY)


def probability(ids, weights, weight_tol=0.0):
    """Probability measure from parallel arrays; clamps round-off negatives
    and renormalizes. Atoms at or below weight_tol are dropped."""
    ids = np.asarray(ids, dtype=int)
    w = np.asarray(weights, dtype=float).copy()
    if w.min(initial=0.0) < -1e-9:
        raise InvalidInput("weight %g too negative for a probability measure" % w.min())
    w = np.maximum(w, 0.0)
    keep = w > weight_tol
    if not keep.any():
        raise InvalidInput("all weights vanished; cannot normalize")
    w = w[keep]
    ids = ids[keep]
    w = w / w.sum()
    order = np.argsort(ids)
    return AtomicMeasure(tuple(zip(ids[order].tolist(), w[order].tolist())), PROBABILITY)


def signed(ids, weights):
    order = np.argsort(np.asarray(ids, dtype=int))
    ids = np.asarray(ids, dtype=int)[order]
    w = np.asarray(weights, dtype=float)[order]
    return AtomicMeasure(tuple(zip(ids.tolist(), w.tolist())), SIGNED)


# -- kernel-dependent arithmetic -------------------------------------------

def mu_eval(measure, kern, x):
    """Embedded function value mu(x) = sum_i w_i k(x_i, x).

    x is a ground id, or raw coordinates for coordinate kernels.
    """
    if not measure.atoms:
        return 0.0
    if isinstance(x, (int, np.integer)):
        return float(np.dot(measure.weights, kern.gram[measure.ids, int(x)]))
    return float(sum(w * kern.eval(i, x) for i, w in measure.atoms))


def norm_sq(measure, kern):
    """||mu||^2 = w' G w, clamped at zero from below."""
    if not measure.atoms:
        return 0.0
    ids = measure.ids
    w = measure.weights
    val = float(w @ kern.gram[np.ix_(ids, ids)] @ w)
    return max(0.0, val)


def inner(mu, nu, kern):
    if not mu.atoms or not nu.atoms:
        return 0.0
    return float(mu.weights @ kern.gram[np.ix_(mu.ids, nu.ids)] @ nu.weights)


def embedded_distance(mu, nu, kern):
    """||mu - nu|| in the kernel embedding.

    Computed through the difference of weight vectors rather than as
    ||mu||^2 - 2<mu,nu> + ||nu||^2; the latter cancels catastrophically
    for nearby measures and cannot resolve distances below sqrt(eps).
    """
    ids = sorted({int(i) for i, _ in mu.atoms} | {int(i) for i, _ in nu.atoms})
    if not ids:
        return 0.0
    dw = np.array([mu.weight_of(i) - nu.weight_of(i) for i in ids])
    G = kern.gram[np.ix_(ids, ids)]
    return float(np.sqrt(max(0.0, float(dw @ G @ dw))))


def convex_combine(mu, x, t):
    """(1-t) mu + t delta_x, merging x into the support if present."""
    if mu.kind != PROBABILITY:
        raise InvalidInput("convex_combine needs a probability measure")
    if not 0.0 <= t <= 1.0:
        raise TOutOfRange("t = %.17g outside [0, 1]" % t)
    x = int(x)
    out = {i: (1.0 - t) * w for i, w in mu.atoms}
    out[x] = out.get(x, 0.0) + t
    atoms = tuple(sorted((i, w) for i, w in out.items() if w != 0.0))
    return AtomicMeasure(atoms, PROBABILITY)


def drop_small_atoms(measure, weight_tol):
    """Remove atoms under weight_tol and rescale the rest to mass one.

    Refuses to empty the measure: if every atom is small the input comes
    back unchanged with a warning.
    """
    if measure.kind != PROBABILITY:
        raise InvalidInput("drop_small_atoms needs a probability measure")
    kept = [(i, w) for i, w in measure.atoms if w >= weight_tol]
    if not kept:
        warnings.warn(
            "every atom is below weight_tol %g; measure left unchanged" % weight_tol,
            AtomRescueWarning,
            stacklevel=2,
        )
        return measure
    if len(kept) == len(measure.atoms):
        return measure
    total = sum(w for _, w in kept)
    atoms = tuple((i, w / total) for i, w in kept)
    return AtomicMeasure(atoms, PROBABILITY)
