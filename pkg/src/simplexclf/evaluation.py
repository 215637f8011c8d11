"""Cross-validated accuracy estimation and model selection.

The protocol: repeatedly split the data into a stratified training and
test part, fit a classifier on the training part, and record the fraction
of correct test predictions.  Replicates use seeds derived from a master
seed by counter, so results are reproducible and independent of execution
order, and a grid search reuses the same splits for every parameter
combination, which makes accuracy differences across the grid directly
comparable.

Grid combinations whose covariances cannot be factorised are recorded and
skipped rather than failing the whole search; a direct ``cv_evaluate``
call on such a combination raises instead.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classifiers import _assemble_rda, _scores_z, _vote, fit_gaussian_groups
from .core import alpha_transform
from .errors import (
    AllCombinationsFailedError,
    EmptyGridError,
    IllConditionedAtError,
    IllConditionedError,
    InvalidSpecError,
    LengthMismatchError,
    ParameterOutOfRangeError,
    TestTooSmallError,
    ZeroWithNonpositiveAlphaError,
)
from .metrics import MetricSpec, pairwise_distances

__all__ = [
    "CvConfig",
    "MethodSpec",
    "GridSpec",
    "EvalReport",
    "GridResult",
    "stratified_split",
    "correct_rate",
    "cv_evaluate",
    "grid_search",
    "breakdown_by_zero_count",
    "METHOD_NAMES",
]

# Stream tags keep the derived seed spaces of distinct purposes disjoint.
_SPLIT_STREAM = 0
_TIE_STREAM = 1

METHOD_NAMES = ("RDA", "LDA", "QDA", "KNN_ALPHA", "KNN_ESOV")


def _rng_for(seed, *path):
    return np.random.default_rng(
        np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    )


@dataclass(frozen=True)
class CvConfig:
    """Split-resampling settings: test size, replicates, master seed."""

    n_test: int
    B: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.n_test < 1:
            raise ParameterOutOfRangeError(
                f"n_test must be at least 1, got {self.n_test}"
            )
        if self.B < 1:
            raise ParameterOutOfRangeError(
                f"B must be at least 1, got {self.B}"
            )


def _fmt(value):
    return f"{value:g}"


@dataclass(frozen=True)
class MethodSpec:
    """One classifier configuration.

    ``name`` is one of ``RDA`` (alpha, lambda, gamma), ``LDA`` (alpha;
    the lambda = 0, gamma = 1 corner), ``QDA`` (alpha; the lambda = 1
    corner), ``KNN_ALPHA`` (alpha, k) or ``KNN_ESOV`` (k).
    """

    name: str
    alpha: float = None
    lam: float = None
    gamma: float = None
    k: int = None
    prior: str = "proportional"

    def __post_init__(self):
        if self.name not in METHOD_NAMES:
            raise InvalidSpecError(
                f"method must be one of {METHOD_NAMES}, got {self.name!r}"
            )
        need_alpha = self.name != "KNN_ESOV"
        if need_alpha and self.alpha is None:
            raise InvalidSpecError(f"{self.name} needs alpha")
        if not need_alpha and self.alpha is not None:
            raise InvalidSpecError(f"{self.name} takes no alpha")
        if self.name == "RDA":
            if self.lam is None or self.gamma is None:
                raise InvalidSpecError("RDA needs lambda and gamma")
            for pname, value in (("lambda", self.lam), ("gamma", self.gamma)):
                if not 0.0 <= value <= 1.0:
                    raise ParameterOutOfRangeError(
                        f"{pname} must lie in [0, 1], got {value}"
                    )
        elif self.lam is not None or self.gamma is not None:
            raise InvalidSpecError(
                f"{self.name} takes no lambda or gamma"
            )
        if self.name in ("KNN_ALPHA", "KNN_ESOV"):
            if self.k is None:
                raise InvalidSpecError(f"{self.name} needs k")
            if int(self.k) < 1:
                raise ParameterOutOfRangeError(
                    f"k must be at least 1, got {self.k}"
                )
        elif self.k is not None:
            raise InvalidSpecError(f"{self.name} takes no k")
        if self.prior not in ("proportional", "uniform"):
            raise InvalidSpecError(
                f"prior must be 'proportional' or 'uniform', "
                f"got {self.prior!r}"
            )

    # -- constructors -------------------------------------------------
    @classmethod
    def rda(cls, alpha, lam, gamma, prior="proportional"):
        return cls("RDA", alpha=float(alpha), lam=float(lam),
                   gamma=float(gamma), prior=prior)

    @classmethod
    def lda(cls, alpha, prior="proportional"):
        return cls("LDA", alpha=float(alpha), prior=prior)

    @classmethod
    def qda(cls, alpha, prior="proportional"):
        return cls("QDA", alpha=float(alpha), prior=prior)

    @classmethod
    def knn_alpha(cls, k, alpha):
        return cls("KNN_ALPHA", alpha=float(alpha), k=int(k))

    @classmethod
    def knn_esov(cls, k):
        return cls("KNN_ESOV", k=int(k))

    # -- descriptors ---------------------------------------------------
    @property
    def engine(self):
        return "knn" if self.name.startswith("KNN") else "gauss"

    @property
    def n_params(self):
        """Free tuning parameters, used for ranking ties."""
        return {"RDA": 3, "LDA": 1, "QDA": 1,
                "KNN_ALPHA": 2, "KNN_ESOV": 1}[self.name]

    def effective_lam_gamma(self):
        if self.name == "RDA":
            return self.lam, self.gamma
        if self.name == "LDA":
            return 0.0, 1.0
        if self.name == "QDA":
            return 1.0, 0.0
        raise InvalidSpecError(f"{self.name} has no covariance weights")

    def metric(self):
        if self.name == "KNN_ALPHA":
            return MetricSpec.alpha_metric(self.alpha)
        if self.name == "KNN_ESOV":
            return MetricSpec.esov()
        raise InvalidSpecError(f"{self.name} has no metric")

    def display(self):
        suffix = "; uniform prior" if (
            self.engine == "gauss" and self.prior == "uniform") else ""
        if self.name == "RDA":
            return (f"RDA({_fmt(self.alpha)}, {_fmt(self.lam)}, "
                    f"{_fmt(self.gamma)}{suffix})")
        if self.name == "LDA":
            return f"LDA({_fmt(self.alpha)}{suffix})"
        if self.name == "QDA":
            return f"QDA({_fmt(self.alpha)}{suffix})"
        if self.name == "KNN_ALPHA":
            return f"{self.k}-NN({_fmt(self.alpha)})"
        return f"{self.k}-NN(ESOV)"

    def to_dict(self):
        out = {"name": self.name}
        for key in ("alpha", "lam", "gamma", "k"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        if self.engine == "gauss":
            out["prior"] = self.prior
        return out

    def _sort_key(self):
        return (
            self.name,
            self.alpha if self.alpha is not None else 0.0,
            self.lam if self.lam is not None else -1.0,
            self.gamma if self.gamma is not None else -1.0,
            self.k if self.k is not None else -1,
        )

    def validate_against(self, dataset, cv):
        if (self.alpha is not None and self.alpha <= 0
                and dataset.has_zeros):
            raise ZeroWithNonpositiveAlphaError(
                f"{self.display()} needs alpha > 0: the data contain zeros"
            )
        if self.k is not None and self.k > dataset.n - cv.n_test:
            raise ParameterOutOfRangeError(
                f"k={self.k} exceeds the training size "
                f"{dataset.n - cv.n_test}"
            )


@dataclass(frozen=True)
class GridSpec:
    """Axes of a model-selection grid.

    Each listed method is expanded over the axes it uses: ``RDA`` over
    alphas x lambdas x gammas, ``LDA`` and ``QDA`` over alphas,
    ``KNN_ALPHA`` over alphas x ks and ``KNN_ESOV`` over ks.
    """

    alphas: tuple = ()
    lambdas: tuple = ()
    gammas: tuple = ()
    ks: tuple = ()
    methods: tuple = METHOD_NAMES
    prior: str = "proportional"

    def __post_init__(self):
        unknown = [m for m in self.methods if m not in METHOD_NAMES]
        if unknown:
            raise InvalidSpecError(
                f"unknown method(s) {unknown}; choose from {METHOD_NAMES}"
            )
        if not self.methods:
            raise EmptyGridError("no methods requested")
        object.__setattr__(self, "methods", tuple(dict.fromkeys(self.methods)))
        object.__setattr__(self, "alphas",
                           tuple(sorted({float(a) for a in self.alphas})))
        object.__setattr__(self, "lambdas",
                           tuple(sorted({float(v) for v in self.lambdas})))
        object.__setattr__(self, "gammas",
                           tuple(sorted({float(v) for v in self.gammas})))
        object.__setattr__(self, "ks",
                           tuple(sorted({int(k) for k in self.ks})))

    def expand(self):
        """All combinations, in deterministic order."""
        combos = []
        need = {
            "RDA": ("alphas", "lambdas", "gammas"),
            "LDA": ("alphas",), "QDA": ("alphas",),
            "KNN_ALPHA": ("alphas", "ks"), "KNN_ESOV": ("ks",),
        }
        for m in self.methods:
            missing = [ax for ax in need[m] if not getattr(self, ax)]
            if missing:
                raise EmptyGridError(
                    f"method {m} needs non-empty {missing}"
                )
            if m == "RDA":
                combos += [
                    MethodSpec.rda(a, l, g, prior=self.prior)
                    for a in self.alphas for l in self.lambdas
                    for g in self.gammas
                ]
            elif m == "LDA":
                combos += [MethodSpec.lda(a, prior=self.prior)
                           for a in self.alphas]
            elif m == "QDA":
                combos += [MethodSpec.qda(a, prior=self.prior)
                           for a in self.alphas]
            elif m == "KNN_ALPHA":
                combos += [MethodSpec.knn_alpha(k, a)
                           for a in self.alphas for k in self.ks]
            else:
                combos += [MethodSpec.knn_esov(k) for k in self.ks]
        if not combos:
            raise EmptyGridError("the grid is empty")
        return combos


def stratified_split(labels, n_test, rng):
    """Split indices into train and test, stratified by label.

    Test seats are allocated to groups proportionally to group size by
    largest remainder (remainder ties to the earlier group in sorted
    label order), then adjusted so every group keeps at least one seat,
    taking seats from the largest allocations.  Members are then drawn
    without replacement within each group.

    Parameters
    ----------
    labels : array_like
        Group label per observation.
    n_test : int
        Total test size; at least the number of groups and less than the
        number of observations.
    rng : numpy.random.Generator

    Returns
    -------
    (numpy.ndarray, numpy.ndarray)
        Sorted train and test index arrays.
    """
    labels = np.asarray(labels).astype(str)
    n = labels.shape[0]
    names = np.unique(labels)
    g = names.size
    n_test = int(n_test)
    if n_test < g:
        raise TestTooSmallError(
            f"n_test={n_test} cannot cover {g} groups"
        )
    if n_test >= n:
        raise ParameterOutOfRangeError(
            f"n_test={n_test} must be smaller than n={n}"
        )
    sizes = np.array([(labels == name).sum() for name in names])
    quota = sizes * (n_test / n)
    seats = np.floor(quota).astype(int)
    remainder = quota - seats
    shortfall = n_test - seats.sum()
    for idx in np.argsort(-remainder, kind="stable")[:shortfall]:
        seats[idx] += 1
    while (seats == 0).any():
        taker = int(np.flatnonzero(seats == 0)[0])
        donor = int(np.argmax(seats))
        seats[donor] -= 1
        seats[taker] += 1
    emptied = np.flatnonzero(seats >= sizes)
    if emptied.size:
        raise ParameterOutOfRangeError(
            f"n_test={n_test} leaves no training members for group(s) "
            f"{names[emptied].tolist()}"
        )
    test = []
    for i, name in enumerate(names):
        members = np.flatnonzero(labels == name)
        test.append(rng.choice(members, size=seats[i], replace=False))
    test = np.sort(np.concatenate(test))
    train = np.setdiff1d(np.arange(n), test)
    return train, test


def correct_rate(predicted, actual):
    """Fraction of positions where the two label sequences agree."""
    predicted = np.asarray(predicted).astype(str)
    actual = np.asarray(actual).astype(str)
    if predicted.shape != actual.shape or predicted.ndim != 1:
        raise LengthMismatchError(
            f"shapes {predicted.shape} and {actual.shape} differ"
        )
    if predicted.size == 0:
        raise LengthMismatchError("empty label sequences")
    return float((predicted == actual).mean())


@dataclass
class EvalReport:
    """Cross-validated accuracy of one method.

    ``q`` holds the per-replicate correct rates; ``sd_q`` uses the
    ``B - 1`` divisor and is ``None`` for a single replicate, as is
    ``se_q`` (``sd_q / sqrt(B)``).  ``per_group`` and ``per_zero_count``
    aggregate per-observation outcomes across replicates.
    """

    method: MethodSpec
    q: np.ndarray = field(repr=False)
    mean_q: float
    sd_q: float
    se_q: float
    n_test: int
    B: int
    seed: int
    splits_reused: bool
    per_group: list = field(repr=False)
    per_zero_count: list = field(repr=False)
    test_indices: np.ndarray = field(repr=False)
    correct: np.ndarray = field(repr=False)

    def to_dict(self, include_replicates=False):
        out = {
            "method": self.method.to_dict(),
            "display": self.method.display(),
            "mean_q": self.mean_q,
            "sd_q": self.sd_q,
            "se_q": self.se_q,
            "n_test": self.n_test,
            "B": self.B,
            "seed": self.seed,
            "splits_reused": self.splits_reused,
            "q": [float(v) for v in self.q],
            "per_group": self.per_group,
            "per_zero_count": self.per_zero_count,
        }
        if include_replicates:
            out["test_indices"] = self.test_indices.tolist()
            out["correct"] = self.correct.astype(int).tolist()
        return out


def _aggregate(values):
    """Mean, sd (B - 1 divisor) and se of a replicate vector; the spread
    entries are None when fewer than two replicates contribute."""
    values = np.asarray(values, dtype=float)
    mean = float(values.mean())
    if values.size < 2:
        return mean, None, None
    sd = float(values.std(ddof=1))
    return mean, sd, sd / float(np.sqrt(values.size))


def _nan_aggregate(values):
    values = np.asarray(values, dtype=float)
    ok = values[~np.isnan(values)]
    if ok.size == 0:
        return None, None
    mean = float(ok.mean())
    sd = float(ok.std(ddof=1)) if ok.size >= 2 else None
    return mean, sd


def breakdown_by_zero_count(test_indices, correct, dataset, tail_start=None):
    """Accuracy by number of zero parts of the test observation.

    For each replicate the correct rate is computed within each bin
    (``NaN`` when the bin is absent from that replicate's test set), then
    averaged across replicates; ``sd`` uses the ``B - 1`` divisor over
    contributing replicates.  ``share`` is the bin's share of the whole
    dataset.  With ``tail_start`` given, counts at or above it collapse
    into one tail bin.

    Parameters
    ----------
    test_indices : numpy.ndarray
        Replicate test membership, shape ``(B, n_test)``.
    correct : numpy.ndarray
        Matching correctness indicators, same shape.
    dataset : LabeledCompositionDataset
    tail_start : int, optional

    Returns
    -------
    list of dict
        One entry per occupied bin, ascending.
    """
    test_indices = np.asarray(test_indices)
    correct = np.asarray(correct, dtype=bool)
    if test_indices.shape != correct.shape:
        raise LengthMismatchError(
            f"shapes {test_indices.shape} and {correct.shape} differ"
        )
    counts = dataset.zero_counts
    if tail_start is not None:
        counts = np.minimum(counts, int(tail_start))
    bins = np.unique(counts)
    B = test_indices.shape[0]
    out = []
    for value in bins:
        members = counts[test_indices] == value
        accs = np.full(B, np.nan)
        for b in range(B):
            hits = members[b]
            if hits.any():
                accs[b] = correct[b][hits].mean()
        mean, sd = _nan_aggregate(accs)
        label = (f"{value}+" if tail_start is not None
                 and value == tail_start else str(int(value)))
        out.append({
            "zeros": label,
            "mean": mean,
            "sd": sd,
            "rows": int((counts == value).sum()),
            "share": float((counts == value).mean()),
            "replicates": int((~np.isnan(accs)).sum()),
        })
    return out


def _per_group_table(test_indices, correct, dataset):
    any_zero = dataset.zero_mask.any(axis=1)
    labels = dataset.labels
    B = test_indices.shape[0]
    out = []
    for name in dataset.group_names:
        members = labels[test_indices] == name
        accs = np.full(B, np.nan)
        for b in range(B):
            hits = members[b]
            if hits.any():
                accs[b] = correct[b][hits].mean()
        mean, sd = _nan_aggregate(accs)
        idx = dataset.group_indices(name)
        out.append({
            "group": name,
            "mean": mean,
            "sd": sd,
            "size": int(idx.size),
            "zero_fraction": float(any_zero[idx].mean()),
        })
    return out


def _make_splits(dataset, cv):
    if cv.n_test >= dataset.n:
        raise ParameterOutOfRangeError(
            f"n_test={cv.n_test} must be smaller than n={dataset.n}"
        )
    return [
        stratified_split(dataset.labels, cv.n_test,
                         _rng_for(cv.seed, _SPLIT_STREAM, b))
        for b in range(cv.B)
    ]


@dataclass
class _Skip:
    method: MethodSpec
    replicate: int
    reason: str

    def to_dict(self):
        return {
            "method": self.method.to_dict(),
            "display": self.method.display(),
            "replicate": self.replicate,
            "reason": self.reason,
        }


def _build_report(dataset, method, cv, splits, test_indices, correct):
    q = correct.mean(axis=1)
    mean_q, sd_q, se_q = _aggregate(q)
    return EvalReport(
        method=method,
        q=q,
        mean_q=mean_q,
        sd_q=sd_q,
        se_q=se_q,
        n_test=cv.n_test,
        B=cv.B,
        seed=cv.seed,
        splits_reused=True,
        per_group=_per_group_table(test_indices, correct, dataset),
        per_zero_count=breakdown_by_zero_count(
            test_indices, correct, dataset
        ),
        test_indices=test_indices,
        correct=correct,
    )


def _run_gauss_family(dataset, alpha, combos, cv, splits):
    """Evaluate every Gaussian-engine combination sharing one alpha.

    Group moments are computed once per replicate and reused across the
    (lambda, gamma) combinations; each combination's numbers are
    identical to what a solo evaluation would produce.
    """
    z = alpha_transform(dataset.rows, alpha)
    labels = dataset.labels
    live = {
        m: {
            "test": np.empty((cv.B, cv.n_test), dtype=int),
            "correct": np.empty((cv.B, cv.n_test), dtype=bool),
        }
        for m in combos
    }
    skips = []
    for b, (train, test) in enumerate(splits):
        if not live:
            break
        models, pooled = fit_gaussian_groups(z[train], labels[train])
        group_names = np.asarray([m.label for m in models])
        z_test = z[test]
        actual = labels[test]
        for method in list(live):
            lam, gamma = method.effective_lam_gamma()
            try:
                model = _assemble_rda(
                    models, pooled, alpha=alpha, lam=lam, gamma=gamma,
                    prior=method.prior, helmert=None, source_dim=dataset.D,
                )
            except IllConditionedError as exc:
                skips.append(_Skip(method, b, str(exc)))
                del live[method]
                continue
            predicted = group_names[_scores_z(model, z_test).argmax(axis=1)]
            live[method]["test"][b] = test
            live[method]["correct"][b] = predicted == actual
    reports = [
        _build_report(dataset, m, cv, splits, s["test"], s["correct"])
        for m, s in live.items()
    ]
    return reports, skips


def _run_knn_family(dataset, metric, combos, cv, splits):
    """Evaluate every k for one metric; the distance matrix and neighbour
    ordering are shared, tie-break streams depend only on the replicate
    and query position."""
    dist = pairwise_distances(dataset.rows, dataset.rows, metric)
    labels = dataset.labels
    kmax = max(m.k for m in combos)
    stores = {
        m: {
            "test": np.empty((cv.B, cv.n_test), dtype=int),
            "correct": np.empty((cv.B, cv.n_test), dtype=bool),
        }
        for m in combos
    }
    for b, (train, test) in enumerate(splits):
        sub = dist[np.ix_(test, train)]
        order = np.argsort(sub, axis=1, kind="stable")[:, :kmax]
        near_labels = labels[train][order]
        actual = labels[test]
        for method in combos:
            store = stores[method]
            store["test"][b] = test
            for i in range(test.size):
                predicted = _vote(
                    near_labels[i, : method.k],
                    lambda b=b, i=i: _rng_for(cv.seed, _TIE_STREAM, b, i),
                )
                store["correct"][b, i] = predicted == actual[i]
    return [
        _build_report(dataset, m, cv, splits, s["test"], s["correct"])
        for m, s in stores.items()
    ], []


def _run_combos(dataset, combos, cv, splits):
    """Group combinations by shared heavy work and evaluate each bundle.

    Returns a list of tasks (callables) whose results preserve per-combo
    independence: every combination's report is bit-identical whether it
    is evaluated alone or alongside others.
    """
    gauss = {}
    knn = {}
    for method in combos:
        method.validate_against(dataset, cv)
        if method.engine == "gauss":
            gauss.setdefault((method.alpha, method.prior), []).append(method)
        else:
            knn.setdefault(method.metric(), []).append(method)
    tasks = []
    for (alpha, _prior), members in sorted(
            gauss.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        tasks.append((
            _run_gauss_family, (dataset, alpha, members, cv, splits)
        ))
    for metric, members in sorted(
            knn.items(), key=lambda kv: (kv[0].kind, kv[0].alpha or 0.0)):
        tasks.append((
            _run_knn_family, (dataset, metric, members, cv, splits)
        ))
    return tasks


def cv_evaluate(dataset, method, cv, *, splits=None):
    """Cross-validated accuracy of one method configuration.

    Parameters
    ----------
    dataset : LabeledCompositionDataset
    method : MethodSpec
    cv : CvConfig
    splits : list, optional
        Precomputed ``(train, test)`` index pairs; defaults to the
        deterministic splits derived from ``cv.seed``.

    Returns
    -------
    EvalReport

    Raises
    ------
    IllConditionedAtError
        If fitting fails at any replicate; the error names the method
        parameters and the replicate.
    """
    if splits is None:
        splits = _make_splits(dataset, cv)
    tasks = _run_combos(dataset, [method], cv, splits)
    reports, skips = [], []
    for fn, args in tasks:
        r, s = fn(*args)
        reports += r
        skips += s
    if skips:
        skip = skips[0]
        raise IllConditionedAtError(
            f"{method.display()} failed at replicate {skip.replicate}: "
            f"{skip.reason}",
            method=method, replicate=skip.replicate, cause=skip.reason,
        )
    return reports[0]


@dataclass
class GridResult:
    """Ranked reports of a grid search plus the skipped combinations."""

    reports: list
    skipped: list
    n_test: int
    B: int
    seed: int

    @property
    def best(self):
        return self.reports[0]

    def best_per_method(self):
        out = {}
        for report in self.reports:
            out.setdefault(report.method.name, report)
        return out

    def to_dict(self, top=None):
        ranked = self.reports if top is None else self.reports[:top]
        return {
            "n_test": self.n_test,
            "B": self.B,
            "seed": self.seed,
            "splits_reused": True,
            "n_combinations": len(self.reports) + len(self.skipped),
            "results": [r.to_dict() for r in ranked],
            "best_per_method": {
                name: r.to_dict()
                for name, r in sorted(self.best_per_method().items())
            },
            "skipped": [s.to_dict() for s in self.skipped],
        }


def _rank_key(report):
    m = report.method
    alpha_rank = (0, abs(m.alpha)) if m.alpha is not None else (1, 0.0)
    return (-report.mean_q, m.n_params, alpha_rank, m._sort_key())


def grid_search(dataset, grid, cv, *, threads=1):
    """Evaluate every grid combination on shared splits and rank them.

    Ranking is by mean accuracy, ties by fewer tuning parameters, then by
    smaller ``|alpha|``.  Combinations that cannot be fitted are recorded
    under ``skipped`` and excluded from the ranking.

    Parameters
    ----------
    dataset : LabeledCompositionDataset
    grid : GridSpec
    cv : CvConfig
    threads : int
        Worker threads for independent bundles of combinations; results
        are identical for any value.

    Returns
    -------
    GridResult

    Raises
    ------
    AllCombinationsFailedError
        If nothing survived.
    """
    combos = grid.expand()
    splits = _make_splits(dataset, cv)
    tasks = _run_combos(dataset, combos, cv, splits)
    threads = max(1, int(threads))
    results = []
    if threads == 1 or len(tasks) == 1:
        for fn, args in tasks:
            results.append(fn(*args))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(fn, *args) for fn, args in tasks]
            results = [f.result() for f in futures]
    reports, skips = [], []
    for r, s in results:
        reports += r
        skips += s
    if not reports:
        raise AllCombinationsFailedError(
            f"all {len(skips)} grid combinations failed; first: "
            f"{skips[0].reason}"
        )
    reports.sort(key=_rank_key)
    skips.sort(key=lambda s: s.method._sort_key())
    return GridResult(
        reports=reports, skipped=skips,
        n_test=cv.n_test, B=cv.B, seed=cv.seed,
    )
