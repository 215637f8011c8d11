"""Gaussian discriminant and nearest-neighbour classification of
compositions in transformed coordinates.

The Gaussian route fits one mean and covariance per group on the
``alpha``-transformed data and scores new points by the log posterior
density.  Covariances are shrunk doubly: ``gamma`` mixes the pooled
covariance toward a scaled identity, then ``lambda`` mixes each group
covariance toward that regularised pool.  ``lambda = 1`` recovers
quadratic discriminant analysis, ``lambda = 0, gamma = 1`` the linear
variant.  The nearest-neighbour route classifies by modal label among the
``k`` closest training compositions under a chosen simplex metric.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .core import alpha_transform, helmert_submatrix
from .errors import (
    DimensionMismatchError,
    GroupTooSmallError,
    IllConditionedError,
    InvalidSpecError,
    LengthMismatchError,
    ParameterOutOfRangeError,
    ZeroWithNonpositiveAlphaError,
)
from .metrics import MetricSpec, pairwise_distances

__all__ = [
    "COND_THRESHOLD",
    "GaussianGroupModel",
    "RdaModel",
    "KnnFit",
    "fit_gaussian_groups",
    "regularize_covariances",
    "fit_rda",
    "rda_scores",
    "rda_predict",
    "fit_knn",
    "knn_predict",
    "knn_predict_batch",
]

# Regularised covariances whose eigenvalue ratio exceeds this are treated
# as numerically singular.
COND_THRESHOLD = 1e12

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class GaussianGroupModel:
    """Per-group sample moments in transformed coordinates."""

    label: str
    mean: np.ndarray
    covariance: np.ndarray
    count: int


def _as_labels(labels, n):
    arr = np.asarray(labels)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise LengthMismatchError(
            f"expected {n} labels, got shape {arr.shape}"
        )
    return arr.astype(str)


def fit_gaussian_groups(z, labels):
    """Sample mean and covariance per group, plus the pooled covariance.

    Covariances use the ``count - 1`` divisor; the pooled covariance is
    the weighted mixture ``sum_i (n_i - 1) S_i / (n - g)``.  Groups are
    ordered by sorted label.

    Parameters
    ----------
    z : array_like
        Transformed observations, one per row, shape ``(n, d)``.
    labels : array_like
        Group label per row.

    Returns
    -------
    (list of GaussianGroupModel, numpy.ndarray)
        Per-group moments and the pooled ``(d, d)`` covariance.

    Raises
    ------
    GroupTooSmallError
        If any group has fewer than two observations.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 2:
        raise DimensionMismatchError("z must be a matrix of row vectors")
    n, d = z.shape
    labels = _as_labels(labels, n)
    names = np.unique(labels)
    if names.size < 2:
        raise InvalidSpecError("need at least two groups")
    models = []
    pooled = np.zeros((d, d))
    for name in names:
        rows = z[labels == name]
        cnt = rows.shape[0]
        if cnt < 2:
            raise GroupTooSmallError(
                f"group {name!r} has {cnt} observation(s); "
                f"covariance estimation needs at least 2"
            )
        mean = rows.mean(axis=0)
        centred = rows - mean
        cov = centred.T @ centred / (cnt - 1)
        pooled += (cnt - 1) * cov
        models.append(GaussianGroupModel(str(name), mean, cov, cnt))
    pooled /= n - names.size
    return models, pooled


def regularize_covariances(models, pooled, lam, gamma):
    """Doubly shrunk covariances, one per group.

    The pooled covariance is first mixed toward a scaled identity,
    ``gamma * pooled + (1 - gamma) * trace(pooled)/d * I``, and each group
    covariance is then mixed toward the result with weight ``lam``.

    Parameters
    ----------
    models : list of GaussianGroupModel
    pooled : numpy.ndarray
        Pooled covariance, shape ``(d, d)``.
    lam, gamma : float
        Mixing weights, each in ``[0, 1]``.

    Returns
    -------
    numpy.ndarray
        Array of shape ``(g, d, d)`` in model order.
    """
    lam = float(lam)
    gamma = float(gamma)
    for name, value in (("lambda", lam), ("gamma", gamma)):
        if not 0.0 <= value <= 1.0:
            raise ParameterOutOfRangeError(
                f"{name} must lie in [0, 1], got {value}"
            )
    pooled = np.asarray(pooled, dtype=float)
    d = pooled.shape[0]
    target = gamma * pooled + (1.0 - gamma) * (np.trace(pooled) / d) * np.eye(d)
    out = np.empty((len(models), d, d))
    for i, m in enumerate(models):
        out[i] = lam * m.covariance + (1.0 - lam) * target
    return out


@dataclass
class RdaModel:
    """A fitted Gaussian discriminant model on transformed coordinates.

    Instances are produced by :func:`fit_rda`; fields are treated as
    immutable.
    """

    alpha: float
    lam: float
    gamma: float
    prior: str
    source_dim: int
    helmert: np.ndarray = field(repr=False)
    group_labels: tuple
    counts: np.ndarray
    means: np.ndarray = field(repr=False)
    covariances: np.ndarray = field(repr=False)
    pooled: np.ndarray = field(repr=False)
    regularized: np.ndarray = field(repr=False)
    chol_factors: np.ndarray = field(repr=False)
    log_dets: np.ndarray
    log_priors: np.ndarray

    @property
    def n_groups(self):
        return len(self.group_labels)


def _log_priors(counts, prior):
    counts = np.asarray(counts, dtype=float)
    if prior == "proportional":
        return np.log(counts / counts.sum())
    if prior == "uniform":
        return np.full(counts.shape, -np.log(counts.size))
    raise InvalidSpecError(
        f"prior must be 'proportional' or 'uniform', got {prior!r}"
    )


def _factorize(sigma, *, alpha=None, lam=None, gamma=None, group=None):
    """Cholesky factor and log determinant of an SPD matrix.

    Raises :class:`IllConditionedError` when the matrix is not positive
    definite or its eigenvalue ratio exceeds ``COND_THRESHOLD``.
    """
    eig = np.linalg.eigvalsh(sigma)
    smallest, largest = eig[0], eig[-1]
    if smallest <= 0 or not np.isfinite(eig).all():
        raise IllConditionedError(
            f"covariance for group {group!r} is not positive definite "
            f"(alpha={alpha}, lambda={lam}, gamma={gamma})",
            alpha=alpha, lam=lam, gamma=gamma, group=group,
            cond=float("inf"),
        )
    cond = largest / smallest
    if cond > COND_THRESHOLD:
        raise IllConditionedError(
            f"covariance for group {group!r} has condition number "
            f"{cond:.3e} > {COND_THRESHOLD:.0e} "
            f"(alpha={alpha}, lambda={lam}, gamma={gamma})",
            alpha=alpha, lam=lam, gamma=gamma, group=group, cond=float(cond),
        )
    try:
        factor = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedError(
            f"covariance for group {group!r} could not be factorised: {exc} "
            f"(alpha={alpha}, lambda={lam}, gamma={gamma})",
            alpha=alpha, lam=lam, gamma=gamma, group=group,
            cond=float(cond),
        ) from exc
    log_det = 2.0 * float(np.log(np.diag(factor)).sum())
    return factor, log_det


def _assemble_rda(models, pooled, *, alpha, lam, gamma, prior, helmert,
                  source_dim):
    regularized = regularize_covariances(models, pooled, lam, gamma)
    g = len(models)
    d = pooled.shape[0]
    factors = np.empty((g, d, d))
    log_dets = np.empty(g)
    for i, m in enumerate(models):
        factors[i], log_dets[i] = _factorize(
            regularized[i], alpha=alpha, lam=lam, gamma=gamma, group=m.label
        )
    counts = np.array([m.count for m in models])
    return RdaModel(
        alpha=float(alpha),
        lam=float(lam),
        gamma=float(gamma),
        prior=prior,
        source_dim=source_dim,
        helmert=helmert,
        group_labels=tuple(m.label for m in models),
        counts=counts,
        means=np.stack([m.mean for m in models]),
        covariances=np.stack([m.covariance for m in models]),
        pooled=pooled,
        regularized=regularized,
        chol_factors=factors,
        log_dets=log_dets,
        log_priors=_log_priors(counts, prior),
    )


def fit_rda(dataset, alpha, lam, gamma, prior="proportional", helmert=None):
    """Fit the regularised Gaussian discriminant model to a dataset.

    Parameters
    ----------
    dataset : LabeledCompositionDataset
        Labelled compositions; must have at least two groups and at least
        two observations per group.
    alpha : float
        Transformation parameter; must be strictly positive if the data
        contain zeros.
    lam, gamma : float
        Shrinkage weights in ``[0, 1]``.  ``lam = 1`` gives the quadratic
        model, ``lam = 0, gamma = 1`` the linear one.
    prior : str
        ``"proportional"`` (training frequencies) or ``"uniform"``.
    helmert : array_like, optional
        Alternative orthonormal basis for the transformation.

    Returns
    -------
    RdaModel
    """
    D = dataset.D
    H = helmert_submatrix(D) if helmert is None else np.asarray(helmert, float)
    z = alpha_transform(dataset.rows, alpha, helmert=H)
    models, pooled = fit_gaussian_groups(z, dataset.labels)
    return _assemble_rda(
        models, pooled, alpha=alpha, lam=lam, gamma=gamma, prior=prior,
        helmert=H, source_dim=D,
    )


def _scores_z(model, z):
    """Log posterior scores for already transformed points, shape (n, g)."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    n = z.shape[0]
    d = model.means.shape[1]
    scores = np.empty((n, model.n_groups))
    for i in range(model.n_groups):
        diff = z - model.means[i]
        white = solve_triangular(
            model.chol_factors[i], diff.T, lower=True, check_finite=False
        )
        maha = (white ** 2).sum(axis=0)
        scores[:, i] = (
            -0.5 * (d * _LOG_2PI + model.log_dets[i])
            - 0.5 * maha
            + model.log_priors[i]
        )
    return scores


def rda_scores(model, x):
    """Per-group log posterior scores for composition(s) ``x``.

    A single composition yields a vector of length ``g``; a matrix of
    compositions yields an ``(n, g)`` matrix.  Higher is better.
    """
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    z = alpha_transform(arr, model.alpha, helmert=model.helmert)
    scores = _scores_z(model, z)
    return scores[0] if single else scores


def rda_predict(model, x):
    """Predicted group label(s): the highest score, ties to the lowest
    group index."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    scores = _scores_z(
        model, alpha_transform(arr, model.alpha, helmert=model.helmert)
    )
    winners = scores.argmax(axis=1)
    labels = np.asarray(model.group_labels)[winners]
    return str(labels[0]) if single else labels


@dataclass
class KnnFit:
    """Training compositions, labels and the metric for k-NN prediction."""

    points: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)
    k: int
    metric: MetricSpec

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2:
            raise DimensionMismatchError("points must be a matrix")
        self.labels = _as_labels(self.labels, self.points.shape[0])
        self.k = int(self.k)
        if not 1 <= self.k <= self.points.shape[0]:
            raise ParameterOutOfRangeError(
                f"k must lie in [1, {self.points.shape[0]}], got {self.k}"
            )
        if not isinstance(self.metric, MetricSpec):
            raise InvalidSpecError("metric must be a MetricSpec")

    @property
    def group_labels(self):
        return tuple(np.unique(self.labels))


def fit_knn(dataset, k, metric):
    """Bind a dataset to a neighbour count and metric.

    Validates that the metric admits the data (zeros require either the
    esov metric or a strictly positive alpha).
    """
    if metric.kind == "alpha" and metric.alpha <= 0 and dataset.has_zeros:
        rows = np.unique(np.nonzero(dataset.zero_mask)[0]).tolist()
        raise ZeroWithNonpositiveAlphaError(
            f"rows {rows} contain zeros; the alpha metric needs "
            f"alpha > 0 for data with zeros (got alpha={metric.alpha})"
        )
    return KnnFit(dataset.rows, dataset.labels, k, metric)


def _vote(ordered_labels, rng_factory):
    """Modal label among ``ordered_labels``; ties drawn uniformly.

    ``rng_factory`` is called only when two or more labels tie, so
    deterministic streams are spent exclusively on actual ties.
    """
    names, counts = np.unique(ordered_labels, return_counts=True)
    winners = names[counts == counts.max()]
    if winners.size == 1:
        return str(winners[0])
    rng = rng_factory()
    return str(winners[int(rng.integers(winners.size))])


def knn_predict(fit, x, rng):
    """Classify one composition by modal label of its ``k`` nearest
    training compositions.

    Neighbours are taken in order of increasing distance, with exact
    distance ties resolved toward the smaller training index.  When two
    or more labels share the top count, one is drawn uniformly from the
    tied set (in sorted label order) using ``rng``; the generator is not
    consulted otherwise.

    Parameters
    ----------
    fit : KnnFit
    x : array_like
        A single composition.
    rng : numpy.random.Generator
        Source of randomness for tie breaking.

    Returns
    -------
    str
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatchError("knn_predict classifies one point")
    dists = pairwise_distances(arr[np.newaxis, :], fit.points, fit.metric)[0]
    order = np.argsort(dists, kind="stable")[: fit.k]
    return _vote(fit.labels[order], lambda: rng)


def knn_predict_batch(fit, x, seed):
    """Classify each row of ``x`` with an independent tie-break stream.

    Streams are derived from ``seed`` and the row position, so results do
    not depend on evaluation order.
    """
    arr = np.atleast_2d(np.asarray(x, dtype=float))
    dists = pairwise_distances(arr, fit.points, fit.metric)
    order = np.argsort(dists, axis=1, kind="stable")[:, : fit.k]
    picked = fit.labels[order]
    out = []
    for i in range(arr.shape[0]):
        out.append(_vote(
            picked[i],
            lambda i=i: np.random.default_rng(
                np.random.SeedSequence(int(seed), spawn_key=(int(i),))
            ),
        ))
    return np.asarray(out)
