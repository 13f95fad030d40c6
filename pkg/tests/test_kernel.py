import math
import warnings

import numpy as np
import pytest

import topiary as tp

from conftest import ZIGZAG_COORDS, ZIGZAG_GRAM


def test_euclidean_zigzag_gram(zigzag):
    assert np.allclose(zigzag.gram, ZIGZAG_GRAM, atol=0)


def test_fock_origin_gram():
    k = tp.fock([0j])
    assert k.gram.tolist() == [[1.0]]


def test_hardy_gram():
    k = tp.hardy([0j, 0.5 + 0j])
    assert np.allclose(k.gram, [[1.0, 1.0], [1.0, 5.0 / 3.0]], atol=1e-15)


def test_fock_eval_real():
    k = tp.fock([1 + 0j])
    assert k.eval(0, 0) == pytest.approx(math.e, abs=1e-12)


def test_fock_eval_rotated():
    # Re e^{1 * conj(i)} = Re e^{-i} = cos 1
    k = tp.fock([1 + 0j, 1j])
    assert k.eval(0, 1) == pytest.approx(math.cos(1.0), abs=1e-12)
    assert k.eval(1 + 0j, 1j) == pytest.approx(math.cos(1.0), abs=1e-12)


def test_hardy_eval_at_origin():
    k = tp.hardy([0j, 0.3 + 0.4j, -0.9 + 0j])
    for j in range(k.n):
        assert k.eval(0, j) == pytest.approx(1.0, abs=1e-14)


def test_embed_distance_self_is_zero(zigzag):
    for i in range(zigzag.n):
        assert zigzag.embed_distance(i, i) == 0.0


def test_embed_distance_zigzag(zigzag):
    # (0,2) vs (2,1): 4 - 2*2 + 5 = 5
    assert zigzag.embed_distance(1, 2) == pytest.approx(math.sqrt(5), abs=1e-12)


def test_explicit_gram_duplicate_rows_distance_zero():
    G = [[2.0, 2.0, 0.0], [2.0, 2.0, 0.0], [0.0, 0.0, 1.0]]
    with pytest.warns(tp.DuplicatePointsWarning):
        k = tp.explicit_gram(G)
    assert k.embed_distance(0, 1) == 0.0


def test_eval_symmetry_all_variants():
    rng = np.random.default_rng(7)
    pts = rng.normal(size=(12, 2))
    ke = tp.euclidean([tuple(p) for p in pts])
    zs = [complex(a, b) for a, b in rng.normal(scale=0.8, size=(12, 2))]
    kf = tp.fock(zs)
    kh = tp.hardy([z / (2 * max(1.0, abs(z))) for z in zs])
    for k in (ke, kf, kh):
        for i in range(k.n):
            for j in range(k.n):
                assert k.eval(i, j) == pytest.approx(k.eval(j, i), abs=1e-12)


def test_gram_psd_random_point_sets():
    rng = np.random.default_rng(11)
    for trial in range(20):
        n = int(rng.integers(2, 51))
        pts = rng.normal(size=(n, 3))
        ke = tp.euclidean([tuple(p) for p in pts])
        zs = rng.normal(scale=0.5, size=n) + 1j * rng.normal(scale=0.5, size=n)
        kf = tp.fock(list(zs))
        kh = tp.hardy(list(0.95 * zs / np.maximum(1.0, np.abs(zs))))
        for k in (ke, kf, kh):
            G = k.gram
            lo = np.linalg.eigvalsh(G)[0]
            assert lo >= -1e-9 * max(np.abs(np.diag(G)).max(), 1.0)


def test_embed_distance_gram_consistency():
    rng = np.random.default_rng(3)
    zs = rng.normal(scale=0.7, size=8) + 1j * rng.normal(scale=0.7, size=8)
    k = tp.fock(list(zs))
    G = k.gram
    for i in range(k.n):
        for j in range(k.n):
            d2 = G[i, i] - 2 * G[i, j] + G[j, j]
            assert k.embed_distance(i, j) ** 2 == pytest.approx(max(d2, 0.0), abs=1e-12)


def test_non_psd_reports_eigenvalue():
    with pytest.raises(tp.NonPSD) as exc:
        tp.explicit_gram([[1.0, 2.0], [2.0, 1.0]])
    assert exc.value.eigenvalue == pytest.approx(-1.0, abs=1e-12)


def test_asymmetric_gram_rejected():
    with pytest.raises(tp.InvalidInput):
        tp.explicit_gram([[1.0, 0.5], [0.1, 1.0]])


def test_duplicate_points_warn_and_group():
    with pytest.warns(tp.DuplicatePointsWarning):
        k = tp.euclidean([(1.0, 0.0), (1.0, 0.0), (0.0, 1.0)])
    assert k.duplicate_groups() == [[0, 1]]


def test_no_warning_without_duplicates(zigzag):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        tp.euclidean(ZIGZAG_COORDS)


def test_fock_overflow_guard():
    # |z conj(w)| = 900 > 700
    with pytest.raises(tp.DomainError):
        tp.fock([30 + 0j, 30j])


def test_hardy_outside_disk_rejected():
    with pytest.raises(tp.DomainError):
        tp.hardy([1.2 + 0j])
    k = tp.hardy([0j])
    with pytest.raises(tp.DomainError):
        k.eval(0, 1.0 + 0j)


def test_labels_default_and_explicit():
    k = tp.euclidean([(0.0, 1.0), (1.0, 0.0)], labels=["up", "right"])
    assert k.labels() == ["up", "right"]
    assert tp.euclidean([(0.0, 1.0)]).labels() == [None]


def test_explicit_gram_rejects_id_free_eval():
    k = tp.explicit_gram([[1.0]])
    with pytest.raises(tp.InvalidInput):
        k.eval(0, (0.0, 0.0))


def test_row_matches_eval_off_ground_set():
    k = tp.fock([0.5 + 0j, -0.2 + 0.1j])
    z = 0.3 - 0.7j
    r = k.row((z.real, z.imag))
    for i in range(k.n):
        assert r[i] == pytest.approx(k.eval(i, z), abs=1e-12)


def test_diagonal_load_shifts_spectrum():
    k = tp.explicit_gram([[1.0, 1.0], [1.0, 1.0]], diagonal_load=0.5)
    assert np.allclose(k.gram, [[1.5, 1.0], [1.0, 1.5]])
