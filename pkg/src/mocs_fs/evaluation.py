"""Exact kNN classification and the bi-objective wrapper fitness.

A candidate feature subset is scored on two minimized objectives:

- classification error, ``1 - correct / total``, from an exact brute-force
  kNN run on the training split (leave-one-out by default so that the
  self-neighbor cannot make ``k = 1`` trivially perfect);
- the fraction of selected features, ``ones / n_features``.

Every call to :meth:`Evaluator.evaluate` costs exactly one unit of the
function-call budget (NFC), including degenerate all-zero masks and cache
hits; test-set scoring is reporting only and never counts.
"""

from __future__ import annotations

import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .data import BitMask, Dataset, Normalizer, apply_normalizer, mask_key

THREADS_ENV_VAR = "MOCS_FS_THREADS"


class Objectives(NamedTuple):
    """(classification error, selected-feature ratio), both in [0, 1]."""

    error: float
    ratio: float


@dataclass(frozen=True)
class Individual:
    """A genotype with its evaluated objectives.

    ``eval_id`` is the sequence number of the fitness evaluation that
    produced the objectives.  Objectives are immutable once set.
    """

    genotype: BitMask
    objectives: Objectives
    eval_id: int

    def __post_init__(self) -> None:
        genotype = np.asarray(self.genotype, dtype=bool)
        genotype.flags.writeable = False
        object.__setattr__(self, "genotype", genotype)

    @property
    def key(self) -> bytes:
        return mask_key(self.genotype)


def knn_predict(
    train: Dataset, queries: Dataset, k: int, loo: bool = False
) -> np.ndarray:
    """Predict query labels by majority vote among the k nearest train rows.

    Distances are squared Euclidean over the (already masked) columns;
    squared distances are monotone-equivalent to Euclidean for ranking and
    are used consistently, including in the tie-break sums below.  With
    ``loo`` the queries must be the training rows themselves and each query
    excludes its own row from the neighbor pool.

    Deterministic tie handling: distance ties at the k-th rank go to the
    smaller row index; vote ties go to the class with the smaller summed
    neighbor distance, then to the smaller class index.

    Raises:
        ValueError: zero masked columns, or ``k`` not smaller than the
            neighbor pool.
    """
    if train.n_features == 0:
        raise ValueError("cannot classify with zero selected features")
    pool = train.n_instances - 1 if loo else train.n_instances
    if k < 1 or k >= pool:
        raise ValueError(f"k={k} must be in [1, {pool}) for this neighbor pool")
    if loo and queries.n_instances != train.n_instances:
        raise ValueError("leave-one-out queries must be the training rows")

    d2 = cdist(queries.features, train.features, "sqeuclidean")
    if loo:
        np.fill_diagonal(d2, np.inf)

    # stable sort: equal distances resolve to the smaller train-row index
    order = np.argsort(d2, axis=1, kind="stable")[:, :k]
    neighbor_labels = train.labels[order]
    neighbor_d2 = np.take_along_axis(d2, order, axis=1)

    n_q = queries.n_instances
    votes = np.zeros((n_q, train.n_classes), dtype=np.int64)
    sums = np.zeros((n_q, train.n_classes), dtype=np.float64)
    rows = np.repeat(np.arange(n_q), k)
    np.add.at(votes, (rows, neighbor_labels.ravel()), 1)
    np.add.at(sums, (rows, neighbor_labels.ravel()), neighbor_d2.ravel())

    top = votes == votes.max(axis=1, keepdims=True)
    sums_among_top = np.where(top, sums, np.inf)
    best = top & (sums_among_top == sums_among_top.min(axis=1, keepdims=True))
    return best.argmax(axis=1).astype(np.int64)


class Evaluator:
    """Bi-objective fitness function over one train/test split.

    Holds the (optionally normalized) splits, the neighbor count, and the
    monotone NFC counter, which increases by exactly one per
    :meth:`evaluate` call and is updated atomically for concurrent callers.
    The optional memo cache only skips recomputation; it never changes NFC
    accounting and stays off in benchmark runs.
    """

    def __init__(
        self,
        train: Dataset,
        test: Dataset | None = None,
        k: int = 5,
        loo: bool = True,
        normalizer: Normalizer | None = None,
        cache: bool = False,
    ) -> None:
        if normalizer is not None:
            train = apply_normalizer(normalizer, train)
            if test is not None:
                test = apply_normalizer(normalizer, test)
        if not 1 <= k < train.n_instances:
            raise ValueError(
                f"k={k} must be in [1, {train.n_instances}) for this train split"
            )
        self.train = train
        self.test = test
        self.k = k
        self.loo = loo
        self.normalizer = normalizer
        self._nfc = 0
        self._lock = threading.Lock()
        self._cache: dict[bytes, Objectives] | None = {} if cache else None
        self._pool: ThreadPoolExecutor | None = None

    @property
    def nfc(self) -> int:
        return self._nfc

    @property
    def n_features(self) -> int:
        return self.train.n_features

    def _masked(self, ds: Dataset, genotype: BitMask) -> Dataset:
        return Dataset(
            features=ds.features[:, genotype],
            labels=ds.labels,
            n_classes=ds.n_classes,
            name=ds.name,
        )

    def _train_objectives(self, genotype: BitMask) -> Objectives:
        ratio = float(genotype.sum()) / genotype.size
        if ratio == 0.0:
            # distances are undefined over zero columns: worst error, best ratio
            return Objectives(error=1.0, ratio=0.0)
        masked = self._masked(self.train, genotype)
        predicted = knn_predict(masked, masked, self.k, loo=self.loo)
        correct = int((predicted == self.train.labels).sum())
        error = 1.0 - correct / self.train.n_instances
        return Objectives(error=error, ratio=ratio)

    def evaluate(self, genotype: BitMask) -> Objectives:
        """Score a genotype on the train split; costs one NFC always."""
        objectives, _ = self._evaluate_with_id(genotype)
        return objectives

    def _evaluate_with_id(self, genotype: BitMask) -> tuple[Objectives, int]:
        genotype = np.asarray(genotype, dtype=bool)
        if genotype.size != self.n_features:
            raise ValueError(
                f"genotype length {genotype.size} does not match {self.n_features} features"
            )
        if self._cache is not None:
            key = mask_key(genotype)
            with self._lock:
                cached = self._cache.get(key)
            objectives = cached if cached is not None else self._train_objectives(genotype)
        else:
            key = b""
            objectives = self._train_objectives(genotype)
        with self._lock:
            self._nfc += 1
            eval_id = self._nfc
            if self._cache is not None:
                self._cache[key] = objectives
        return objectives, eval_id

    def evaluate_individual(self, genotype: BitMask) -> Individual:
        objectives, eval_id = self._evaluate_with_id(genotype)
        return Individual(genotype=genotype, objectives=objectives, eval_id=eval_id)

    def evaluate_individuals(self, genotypes: Sequence[BitMask]) -> list[Individual]:
        """Evaluate a batch, preserving input order.

        Evaluations are independent, so they may run on the thread pool
        configured via the ``MOCS_FS_THREADS`` environment variable;
        results are identical to sequential execution.
        """
        pool = self._thread_pool()
        if pool is None or len(genotypes) < 2:
            return [self.evaluate_individual(g) for g in genotypes]
        return list(pool.map(self.evaluate_individual, genotypes))

    def evaluate_on_test(self, genotype: BitMask) -> Objectives:
        """Fit on the full train split, score on the test split.

        Reporting only: never increments NFC, never leave-one-out.
        """
        if self.test is None:
            raise ValueError("evaluator was built without a test split")
        genotype = np.asarray(genotype, dtype=bool)
        if genotype.size != self.n_features:
            raise ValueError(
                f"genotype length {genotype.size} does not match {self.n_features} features"
            )
        ratio = float(genotype.sum()) / genotype.size
        if ratio == 0.0:
            return Objectives(error=1.0, ratio=0.0)
        masked_train = self._masked(self.train, genotype)
        masked_test = self._masked(self.test, genotype)
        predicted = knn_predict(masked_train, masked_test, self.k, loo=False)
        correct = int((predicted == self.test.labels).sum())
        error = 1.0 - correct / self.test.n_instances
        return Objectives(error=error, ratio=ratio)

    def _thread_pool(self) -> ThreadPoolExecutor | None:
        threads = configured_threads()
        if threads <= 1:
            return None
        if self._pool is None:
            self._pool = ThreadPoolExecutor(max_workers=threads)
        return self._pool


def configured_threads() -> int:
    """Evaluation thread count from the environment (default 1)."""
    raw = os.environ.get(THREADS_ENV_VAR, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
