"""Autoscaled PCA with orthogonal residual distances (the SIMCA engine)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InputError, InsufficientDataError


@dataclass(frozen=True)
class ScaledMatrix:
    rows: np.ndarray
    center: np.ndarray
    scale: np.ndarray

    def transform(self, x):
        return (np.asarray(x, dtype=float) - self.center) / self.scale

    def inverse(self, z):
        return np.asarray(z, dtype=float) * self.scale + self.center


@dataclass(frozen=True)
class PcaModel:
    loadings: np.ndarray            # p x A, orthonormal columns
    explained_variance: np.ndarray  # length A
    score_sd: np.ndarray            # length A
    score_range: np.ndarray         # A x 2 (min, max)

    @property
    def n_components(self):
        return self.loadings.shape[1]

    @property
    def n_variables(self):
        return self.loadings.shape[0]


def autoscale(data, allow_degenerate=False, names=None):
    """Center columns and divide by their sample standard deviation.

    A constant column raises unless ``allow_degenerate``, in which case it is
    only centered (scale 1).
    """
    x = np.asarray(data, dtype=float)
    if x.ndim != 2:
        raise InputError(f"expected a 2-D matrix, got shape {x.shape}")
    n, p = x.shape
    if n < 2:
        raise InsufficientDataError(f"need at least 2 rows to autoscale, got {n}")
    center = x.mean(axis=0)
    scale = x.std(axis=0, ddof=1)
    flat = ~(scale > 0)
    if flat.any():
        if not allow_degenerate:
            cols = [names[j] if names else j for j in np.flatnonzero(flat)]
            raise DegenerateInputError(f"constant column(s) {cols}; cannot autoscale")
        scale = np.where(flat, 1.0, scale)
    return ScaledMatrix((x - center) / scale, center, scale)


def _fix_signs(v):
    """Flip each column so that its largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[idx, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    return v * signs


def _fit_scaled(z, n_components):
    n, p = z.shape
    _, s, vt = np.linalg.svd(z, full_matrices=False)
    loadings = _fix_signs(vt[:n_components].T.copy())
    scores = z @ loadings
    return PcaModel(
        loadings=loadings,
        explained_variance=s[:n_components] ** 2 / (n - 1),
        score_sd=scores.std(axis=0, ddof=1),
        score_range=np.column_stack([scores.min(axis=0), scores.max(axis=0)]),
    )


def fit_pca(data, n_components, allow_degenerate=False, names=None):
    """Autoscale ``data`` and keep the top ``n_components`` right singular vectors."""
    scaled = autoscale(data, allow_degenerate=allow_degenerate, names=names)
    n, p = scaled.rows.shape
    if not 1 <= n_components <= min(n - 1, p):
        raise InputError(f"n_components={n_components} outside [1, {min(n - 1, p)}]")
    return _fit_scaled(scaled.rows, int(n_components)), scaled


def project_and_residual(model: PcaModel, scaled_row):
    """Scores, squared orthogonal distance and residual vector of one scaled row.

    The squared distance is the residual sum of squares per residual degree
    of freedom, ``sum(e**2) / (p - A)``.
    """
    row = np.asarray(scaled_row, dtype=float)
    p, a = model.loadings.shape
    if row.shape != (p,):
        raise InputError(f"row has shape {row.shape}, model expects ({p},)")
    if a >= p:
        raise InputError("orthogonal distance needs fewer components than variables")
    scores = model.loadings.T @ row
    residual = row - model.loadings @ scores
    return scores, float(residual @ residual) / (p - a), residual


def project_many(model: PcaModel, scaled_rows):
    """Vectorized :func:`project_and_residual` over the rows of a matrix."""
    z = np.atleast_2d(np.asarray(scaled_rows, dtype=float))
    p, a = model.loadings.shape
    if z.shape[1] != p:
        raise InputError(f"rows have {z.shape[1]} columns, model expects {p}")
    if a >= p:
        raise InputError("orthogonal distance needs fewer components than variables")
    scores = z @ model.loadings
    residual = z - scores @ model.loadings.T
    return scores, np.einsum("ij,ij->i", residual, residual) / (p - a), residual


def residuals(model: PcaModel, scaled_rows):
    z = np.asarray(scaled_rows, dtype=float)
    return z - (z @ model.loadings) @ model.loadings.T


def class_rsd(model: PcaModel, scaled_training):
    """Class residual standard deviation s0.

    s0**2 = sum(e**2) / ((n - A - 1) * (p - A))
    """
    z = np.asarray(scaled_training, dtype=float)
    n, p = z.shape
    a = model.n_components
    if n <= a + 1:
        raise InsufficientDataError(f"class RSD needs n > A + 1 (n={n}, A={a})")
    if a >= p:
        raise InputError("class RSD needs fewer components than variables")
    e = residuals(model, z)
    return float(np.sqrt(np.sum(e * e) / ((n - a - 1) * (p - a))))


def _cv_press(z_train_raw, z_test_raw, max_a):
    """PRESS contributions of one held-out segment for A = 1..max_a.

    Each held-out value x_j is predicted from scores estimated on the other
    variables only, so adding noise components is penalized.
    """
    scaled = autoscale(z_train_raw, allow_degenerate=True)
    _, _, vt = np.linalg.svd(scaled.rows, full_matrices=False)
    test = scaled.transform(z_test_raw)
    p = test.shape[1]
    out = np.zeros(max_a)
    for a in range(1, max_a + 1):
        load = vt[:a].T
        for j in range(p):
            keep = np.arange(p) != j
            t, *_ = np.linalg.lstsq(load[keep], test[:, keep].T, rcond=None)
            pred = load[j] @ t
            out[a - 1] += np.sum((test[:, j] - pred) ** 2)
    return out


def select_components_cv(data, max_components, n_segments=7):
    """Number of components minimizing venetian-blind cross-validated PRESS.

    Ties resolve to the smaller model.
    """
    x = np.asarray(data, dtype=float)
    n, p = x.shape
    segments = max(2, min(n_segments, n))
    smallest_train = n - -(-n // segments)
    max_a = min(int(max_components), n - 1, p - 1, smallest_train - 1)
    if max_a < 1:
        raise InputError(f"cannot cross-validate components for shape {x.shape}")
    autoscale(x)  # degenerate columns fail here, as in fit_pca
    press = np.zeros(max_a)
    for s in range(segments):
        test = np.arange(s, n, segments)
        train = np.setdiff1d(np.arange(n), test)
        press += _cv_press(x[train], x[test], max_a)
    return int(np.argmin(press)) + 1
