"""Ground sets and reproducing-kernel pairings.

Four kernel variants: an explicit Gram matrix, Euclidean dot products,
the real Fock kernel Re e^{z conj(w)}, and the real Hardy kernel
Re (1 + z conj(w)) / (1 - z conj(w)) on the open unit disk. A Kernel owns
its finite ground set; the Gram matrix is built once at construction and
validated positive semidefinite by eigendecomposition so the offending
eigenvalue can be reported. No silent jitter: callers who want diagonal
loading must ask for it explicitly.
"""

from dataclasses import dataclass
from typing import Optional
import warnings

import numpy as np

from .errors import DomainError, DuplicatePointsWarning, InvalidInput, NonPSD

# Re z*conj(w) beyond this overflows exp(); sqrt(700) ~ 26.45 is the largest
# admissible point radius for the Fock variant.
FOCK_EXPONENT_GUARD = 700.0

DEFAULT_PSD_TOL = 1e-9


@dataclass(frozen=True)
class Point:
    id: int
    coords: Optional[object] = None  # complex for fock/hardy, ndarray for euclidean
    label: Optional[str] = None


def _as_complex_array(points):
    pts = np.asarray(points)
    if pts.ndim == 2 and pts.shape[1] == 2 and not np.iscomplexobj(pts):
        pts = pts[:, 0] + 1j * pts[:, 1]
    return pts.astype(complex).reshape(-1)


def _fock_pair(z, w):
    u = z * np.conj(w)
    if abs(u) > FOCK_EXPONENT_GUARD:
        raise DomainError(
            "fock kernel overflow: |z*conj(w)| = %g exceeds %g "
            "(max admissible point radius %.4f)"
            % (abs(u), FOCK_EXPONENT_GUARD, np.sqrt(FOCK_EXPONENT_GUARD))
        )
    # explicit e^a (cos b + i sin b) decomposition, real part only
    return np.exp(u.real) * np.cos(u.imag)


def _hardy_pair(z, w):
    for p in (z, w):
        if abs(p) >= 1.0:
            raise DomainError("hardy kernel requires |z| < 1, got |z| = %g" % abs(p))
    u = z * np.conj(w)
    return ((1.0 + u) / (1.0 - u)).real


class Kernel:
    """A kernel variant together with its finite ground set.

    Immutable after construction; the Gram matrix is cached write-once and
    shared. Points are addressed by their integer id (position in the
    ground set).
    """

    def __init__(self, variant, points, gram, psd_tol=DEFAULT_PSD_TOL,
                 diagonal_load=0.0, _coords=None):
        self.variant = variant
        self.points = tuple(points)
        self.psd_tol = float(psd_tol)
        self.diagonal_load = float(diagonal_load)
        self._coords = _coords

        G = np.array(gram, dtype=float)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise InvalidInput("gram matrix must be square, got shape %s" % (G.shape,))
        if G.shape[0] != len(self.points):
            raise InvalidInput(
                "gram size %d does not match %d points" % (G.shape[0], len(self.points))
            )
        scale = max(1.0, float(np.max(np.abs(G))) if G.size else 1.0)
        if float(np.max(np.abs(G - G.T))) > 1e-12 * scale:
            raise InvalidInput("gram matrix is not symmetric")
        G = (G + G.T) / 2.0
        if self.diagonal_load:
            G = G + self.diagonal_load * np.eye(G.shape[0])

        self._validate_psd(G)
        G.setflags(write=False)
        self._gram = G

        dups = self.duplicate_groups()
        if dups:
            warnings.warn(
                "ground set contains %d group(s) of duplicate points (equal "
                "Gram rows); solvers deduplicate before optimizing" % len(dups),
                DuplicatePointsWarning,
                stacklevel=2,
            )

    def _validate_psd(self, G):
        if G.size == 0:
            raise InvalidInput("ground set is empty")
        diag_scale = float(np.max(np.abs(np.diag(G))))
        if diag_scale == 0.0:
            diag_scale = 1.0
        eigs = np.linalg.eigvalsh(G)
        if eigs[0] < -self.psd_tol * diag_scale:
            raise NonPSD(
                "gram matrix is not positive semidefinite: "
                "eigenvalue %g < -%g * %g" % (eigs[0], self.psd_tol, diag_scale),
                eigenvalue=float(eigs[0]),
            )

    # -- basic queries ----------------------------------------------------

    @property
    def n(self):
        return len(self.points)

    @property
    def gram(self):
        return self._gram

    @property
    def coords(self):
        """Coordinate array for coordinate-based variants, else None."""
        return self._coords

    def labels(self):
        return [p.label for p in self.points]

    def _resolve(self, x):
        """Accept a ground id or raw coordinates (coordinate variants only).

        Returns ('id', i) or ('coord', value).
        """
        if isinstance(x, (int, np.integer)):
            i = int(x)
            if not 0 <= i < self.n:
                raise InvalidInput("point id %d outside ground set of size %d" % (i, self.n))
            return "id", i
        if self.variant == "explicit-gram":
            raise InvalidInput("explicit-gram kernels only evaluate at ground ids")
        if self.variant == "euclidean":
            return "coord", np.asarray(x, dtype=float)
        return "coord", complex(x[0], x[1]) if isinstance(x, (tuple, list)) else complex(x)

    def eval(self, x, y):
        """k(x, y); x and y are ground ids or, for coordinate variants,
        raw coordinates."""
        kx, vx = self._resolve(x)
        ky, vy = self._resolve(y)
        if kx == "id" and ky == "id":
            return float(self._gram[vx, vy])
        if kx == "id":
            vx = self._coords[vx]
        if ky == "id":
            vy = self._coords[vy]
        if self.variant == "euclidean":
            return float(np.dot(vx, vy))
        if self.variant == "fock":
            return float(_fock_pair(vx, vy))
        if self.variant == "hardy":
            return float(_hardy_pair(vx, vy))
        raise InvalidInput("unknown kernel variant %r" % self.variant)

    def row(self, z):
        """Vector of k(x_i, z) over the ground set, z a raw coordinate.

        Only coordinate variants can leave the ground set; used for sampling
        embedded functions on a grid.
        """
        kind, v = self._resolve(z)
        if kind == "id":
            return np.array(self._gram[:, v])
        if self.variant == "euclidean":
            return self._coords @ v
        if self.variant == "fock":
            u = self._coords * np.conj(v)
            if float(np.max(np.abs(u), initial=0.0)) > FOCK_EXPONENT_GUARD:
                raise DomainError(
                    "fock kernel overflow at query point (max admissible "
                    "radius %.4f)" % np.sqrt(FOCK_EXPONENT_GUARD)
                )
            return np.exp(u.real) * np.cos(u.imag)
        if self.variant == "hardy":
            if abs(v) >= 1.0:
                raise DomainError("hardy kernel requires |z| < 1, got |z| = %g" % abs(v))
            u = self._coords * np.conj(v)
            return ((1.0 + u) / (1.0 - u)).real
        raise InvalidInput("unknown kernel variant %r" % self.variant)

    def embed_distance(self, x, y):
        """||k_x - k_y||, the embedded metric. Clamped at zero from below
        to absorb round-off on near-duplicates."""
        kxx = self.eval(x, x)
        kxy = self.eval(x, y)
        kyy = self.eval(y, y)
        return float(np.sqrt(max(0.0, kxx - 2.0 * kxy + kyy)))

    def duplicate_groups(self):
        """Groups of ids whose Gram rows agree within 1e-12 (quantized).

        Singleton groups are omitted. Solvers collapse each group to one
        representative before optimizing; equal margins on duplicates
        otherwise cause needless exchange cycles.
        """
        if self.n == 0:
            return []
        keys = {}
        quant = np.round(self._gram, 12)
        for i in range(self.n):
            keys.setdefault(quant[i].tobytes(), []).append(i)
        return [ids for ids in keys.values() if len(ids) > 1]


# -- constructors ---------------------------------------------------------

def explicit_gram(matrix, labels=None, psd_tol=DEFAULT_PSD_TOL, diagonal_load=0.0):
    """Kernel from a precomputed Gram (or covariance) matrix."""
    G = np.asarray(matrix, dtype=float)
    n = G.shape[0] if G.ndim == 2 else 0
    labels = _check_labels(labels, n)
    points = [Point(i, None, labels[i]) for i in range(n)]
    return Kernel("explicit-gram", points, G, psd_tol, diagonal_load)


def euclidean(coords, labels=None, psd_tol=DEFAULT_PSD_TOL, diagonal_load=0.0):
    """Dot-product kernel on real vectors; coords is an (n, d) array."""
    C = np.atleast_2d(np.asarray(coords, dtype=float))
    labels = _check_labels(labels, C.shape[0])
    points = [Point(i, C[i].copy(), labels[i]) for i in range(C.shape[0])]
    G = C @ C.T
    return Kernel("euclidean", points, G, psd_tol, diagonal_load, _coords=C)


def fock(points, labels=None, psd_tol=DEFAULT_PSD_TOL, diagonal_load=0.0):
    """Real Fock kernel Re e^{z conj(w)} on complex points.

    Points may be complex scalars or (a, b) pairs. Pairings with
    |z conj(w)| > 700 would overflow the exponential and raise DomainError.
    """
    Z = _as_complex_array(points)
    labels = _check_labels(labels, Z.size)
    U = np.multiply.outer(Z, np.conj(Z))
    if Z.size and float(np.max(np.abs(U))) > FOCK_EXPONENT_GUARD:
        raise DomainError(
            "fock kernel overflow on ground set (max admissible point "
            "radius %.4f)" % np.sqrt(FOCK_EXPONENT_GUARD)
        )
    G = np.exp(U.real) * np.cos(U.imag)
    pts = [Point(i, complex(Z[i]), labels[i]) for i in range(Z.size)]
    return Kernel("fock", pts, G, psd_tol, diagonal_load, _coords=Z)


def hardy(points, labels=None, psd_tol=DEFAULT_PSD_TOL, diagonal_load=0.0):
    """Real Hardy kernel Re (1 + z conj(w))/(1 - z conj(w)); needs |z| < 1."""
    Z = _as_complex_array(points)
    labels = _check_labels(labels, Z.size)
    if Z.size and float(np.max(np.abs(Z))) >= 1.0:
        raise DomainError("hardy kernel requires all |z| < 1")
    U = np.multiply.outer(Z, np.conj(Z))
    G = ((1.0 + U) / (1.0 - U)).real
    pts = [Point(i, complex(Z[i]), labels[i]) for i in range(Z.size)]
    return Kernel("hardy", pts, G, psd_tol, diagonal_load, _coords=Z)


def _check_labels(labels, n):
    if labels is None:
        return [None] * n
    labels = list(labels)
    if len(labels) != n:
        raise InvalidInput("got %d labels for %d points" % (len(labels), n))
    return labels
