import numpy as np
import pytest
from hypothesis import given, strategies as st

from bibsimca import pca
from bibsimca.errors import DegenerateInputError, InputError, InsufficientDataError


def eig_oracle(x):
    """Eigenpairs of the sample correlation matrix, descending."""
    vals, vecs = np.linalg.eigh(np.corrcoef(x, rowvar=False))
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def test_loadings_match_correlation_eigh(rng):
    x = rng.normal(size=(6, 5))
    model, _ = pca.fit_pca(x, 4)
    vals, vecs = eig_oracle(x)
    np.testing.assert_allclose(model.explained_variance, vals[:4], atol=1e-10)
    for k in range(4):
        s = np.sign(vecs[:, k] @ model.loadings[:, k])
        np.testing.assert_allclose(model.loadings[:, k], s * vecs[:, k], atol=1e-10)


def test_sign_convention(rng):
    model, _ = pca.fit_pca(rng.normal(size=(30, 5)), 3)
    for k in range(3):
        col = model.loadings[:, k]
        assert col[np.argmax(np.abs(col))] > 0


def _unit_model(loading):
    load = np.asarray(loading, dtype=float).reshape(-1, 1)
    return pca.PcaModel(load, np.ones(1), np.ones(1), np.array([[-1.0, 1.0]]))


def test_hand_built_orthogonal_distance():
    scores, d2, e = pca.project_and_residual(_unit_model([1, 0, 0]), np.ones(3))
    np.testing.assert_array_equal(e, [0, 1, 1])
    assert d2 == 1.0
    assert scores.tolist() == [1.0]


def test_project_many_matches_rowwise(rng):
    model, scaled = pca.fit_pca(rng.normal(size=(20, 5)), 2)
    s, d2, _ = pca.project_many(model, scaled.rows)
    for i, row in enumerate(scaled.rows):
        si, di, _ = pca.project_and_residual(model, row)
        np.testing.assert_allclose(s[i], si, atol=1e-12)
        assert d2[i] == pytest.approx(di, abs=1e-12)


def test_distance_needs_residual_dof(rng):
    model, scaled = pca.fit_pca(rng.normal(size=(10, 3)), 3)
    with pytest.raises(InputError):
        pca.project_and_residual(model, scaled.rows[0])


def test_class_rsd_toy_by_hand():
    x = np.array([[1.0, 2.0, 0.5], [2.0, 1.0, 1.5], [3.0, 5.0, 1.0], [4.0, 3.0, 4.0]])
    model, scaled = pca.fit_pca(x, 1)
    total = 0.0
    p_load = model.loadings[:, 0]
    for row in scaled.rows:
        t = sum(a * b for a, b in zip(row, p_load))
        total += sum((row[j] - t * p_load[j]) ** 2 for j in range(3))
    expected = (total / ((4 - 1 - 1) * (3 - 1))) ** 0.5
    assert pca.class_rsd(model, scaled.rows) == pytest.approx(expected, rel=1e-12)


def test_class_rsd_needs_rows():
    x = np.array([[1.0, 2.0, 3.0], [2.0, 1.0, 0.0]])
    model, scaled = pca.fit_pca(x, 1)
    with pytest.raises(InsufficientDataError):
        pca.class_rsd(model, scaled.rows)


@pytest.mark.parametrize("rank", [1, 2, 3])
def test_cv_recovers_known_rank(rank):
    r = np.random.default_rng(rank)
    x = r.normal(size=(60, rank)) @ r.normal(size=(rank, 5)) + 1e-6 * r.normal(size=(60, 5))
    assert pca.select_components_cv(x, 4, n_segments=7) == rank


def test_constant_column_rejected():
    x = np.column_stack([np.arange(5.0), np.ones(5)])
    with pytest.raises(DegenerateInputError):
        pca.fit_pca(x, 1)
    scaled = pca.autoscale(x, allow_degenerate=True)
    assert scaled.scale[1] == 1.0


def test_component_bounds(rng):
    with pytest.raises(InputError):
        pca.fit_pca(rng.normal(size=(4, 5)), 4)
    with pytest.raises(InputError):
        pca.fit_pca(rng.normal(size=(10, 3)), 0)


def test_autoscale_round_trip(rng):
    x = rng.normal(3, 2, size=(12, 4))
    s = pca.autoscale(x)
    np.testing.assert_allclose(s.inverse(s.rows), x, atol=1e-12)
    np.testing.assert_allclose(s.rows.std(axis=0, ddof=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(s.transform(x), s.rows, atol=1e-12)


@given(st.integers(0, 10_000))
def test_reconstruction_error_non_increasing(seed):
    r = np.random.default_rng(seed)
    x = r.normal(size=(int(r.integers(6, 21)), 5))
    scaled = pca.autoscale(x)
    errs = []
    for a in range(1, 6):
        model, _ = pca.fit_pca(x, a)
        errs.append(float(np.sum(pca.residuals(model, scaled.rows) ** 2)))
    assert all(b <= a + 1e-9 for a, b in zip(errs, errs[1:]))


def test_distance_invariant_under_row_permutation(rng):
    x = rng.normal(size=(25, 5))
    probe = rng.normal(size=5)
    m1, s1 = pca.fit_pca(x, 2)
    m2, s2 = pca.fit_pca(x[rng.permutation(25)], 2)
    d1 = pca.project_and_residual(m1, s1.transform(probe))[1]
    d2 = pca.project_and_residual(m2, s2.transform(probe))[1]
    assert d1 == pytest.approx(d2, rel=1e-10)


def test_fit_is_deterministic(rng):
    x = rng.normal(size=(15, 5))
    a, _ = pca.fit_pca(x, 2)
    b, _ = pca.fit_pca(x.copy(), 2)
    np.testing.assert_array_equal(a.loadings, b.loadings)
