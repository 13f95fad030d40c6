import numpy as np
import pytest

import topiary as tp

ZIGZAG_COORDS = [(-3.0, 1.0), (0.0, 2.0), (2.0, 1.0)]
ZIGZAG_GRAM = np.array([[10.0, 2.0, -5.0], [2.0, 4.0, 2.0], [-5.0, 2.0, 5.0]])


@pytest.fixture
def zigzag():
    """Euclidean kernel of (-3,1),(0,2),(2,1); the worked instance."""
    return tp.euclidean(ZIGZAG_COORDS)


@pytest.fixture
def zigzag_psi(zigzag):
    return tp.PsiSpec.zero(zigzag)


def random_instance(rng, n):
    """Random PSD Gram (Wishart) and psi uniform in [-1, 1]^n."""
    A = rng.normal(size=(n, n + 2))
    G = A @ A.T
    psi = rng.uniform(-1.0, 1.0, size=n)
    return tp.explicit_gram(G), tp.PsiSpec.table(psi)


def embedding_gap(kern, mu, nu):
    """||mu - nu|| through the Gram; works on weight vectors too."""
    return tp.embedded_distance(mu, nu, kern)
