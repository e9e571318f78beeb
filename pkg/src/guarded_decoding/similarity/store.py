"""
Demonstration example store: loading, clustering, ratio-R sampling and
exact max-similarity scans.
"""
import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .clustering import MeanShift
from .embedder import HashingEmbedder
from ..core.exceptions import DimensionMismatchError, StoreFormatError
from ..core.parameters import StoreConfig
from ..models.vocabulary import tokenize

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DemonstrationExample:
    """
    A text that violates the safety constraint.

    Attributes:
        id: Unique identifier within the store
        text: Raw text as supplied
        tokens: Tokenized text
        vector: Embedding under the store's embedder (or a supplied override)
        cluster: Mean-shift label, None until clustered
    """
    id: str
    text: str
    tokens: Tuple[str, ...]
    vector: np.ndarray
    cluster: Optional[int] = None


@dataclass
class SimilarityScan:
    """
    Result of scanning a batch of candidate vectors against a store.

    Attributes:
        max_scores: Per-candidate maximum cosine similarity (0 for an empty store)
        nearest_ids: Id of the example achieving the maximum (None for an empty store)
        min_scores: Per-candidate minimum cosine similarity (0 for an empty store)
    """
    max_scores: np.ndarray
    nearest_ids: List[Optional[str]]
    min_scores: np.ndarray


def ceil_quota(ratio: float, size: int) -> int:
    """ceil(ratio * size) evaluated on the decimal value of ``ratio``."""
    return math.ceil(Fraction(repr(float(ratio))) * size)


def cluster_sizes(labels: Sequence[int]) -> Dict[int, int]:
    """Number of examples per cluster label."""
    return dict(sorted(Counter(int(label) for label in labels).items()))


class DemonstrationStore:
    """
    Immutable collection of demonstration examples.

    Vectors are kept as a stacked matrix of unit rows; a sampled subset is
    itself a store sharing the embedder.
    """

    def __init__(self, examples: Sequence[DemonstrationExample], embedder: HashingEmbedder):
        """
        Initialize store.

        Args:
            examples: Examples with unique ids and vectors of the embedder's dimension
            embedder: Embedder used for candidates compared against this store
        """
        ids = [ex.id for ex in examples]
        if len(set(ids)) != len(ids):
            duplicates = sorted(i for i, n in Counter(ids).items() if n > 1)
            raise ValueError(f"Duplicate example ids: {duplicates[:5]}")
        for ex in examples:
            if ex.vector.shape != (embedder.dimension,):
                raise DimensionMismatchError(
                    f"Example {ex.id!r} has dimension {ex.vector.shape}, "
                    f"expected {embedder.dimension}"
                )

        self.examples: Tuple[DemonstrationExample, ...] = tuple(examples)
        self.embedder = embedder
        self.ids: List[str] = ids

        if self.examples:
            self.matrix = np.vstack([ex.vector for ex in self.examples])
        else:
            self.matrix = np.zeros((0, embedder.dimension))
        self.matrix.setflags(write=False)
        self._norms = np.linalg.norm(self.matrix, axis=1)
        # rank of each id in lexicographic order, for tie-breaking
        self._id_rank = np.empty(len(ids), dtype=int)
        self._id_rank[np.argsort(np.array(ids, dtype=object), kind="stable")] = np.arange(len(ids))
        self._labels: Dict[Tuple, np.ndarray] = {}

    @classmethod
    def empty(cls, embedder: HashingEmbedder) -> "DemonstrationStore":
        return cls([], embedder)

    @classmethod
    def from_texts(
        cls,
        items: Iterable[Tuple[str, str]],
        embedder: HashingEmbedder,
        fit_idf: bool = True,
        overrides: Optional[Dict[str, np.ndarray]] = None
    ) -> "DemonstrationStore":
        """
        Build a store from (id, text) pairs.

        Args:
            items: Example ids and raw texts
            embedder: Base embedder
            fit_idf: Freeze the IDF table on these texts before embedding
            overrides: Example id -> precomputed embedding

        Returns:
            Store whose embedder carries the frozen IDF table
        """
        triples = [(str(ex_id), text, tuple(tokenize(text))) for ex_id, text in items]
        if fit_idf:
            embedder = embedder.fit(tokens for _, _, tokens in triples)
        overrides = overrides or {}

        examples = []
        for ex_id, text, tokens in triples:
            if ex_id in overrides:
                vector = _normalized(overrides[ex_id], embedder.dimension, ex_id)
            else:
                vector = embedder.embed(tokens)
            examples.append(DemonstrationExample(ex_id, text, tokens, vector))
        return cls(examples, embedder)

    @classmethod
    def load(
        cls,
        path: Union[str, Path],
        embedder: HashingEmbedder,
        fit_idf: bool = True
    ) -> "DemonstrationStore":
        """
        Load a JSON Lines file of {"id", "text"[, "embedding"]} objects.

        Raises:
            StoreFormatError: malformed line, missing field or duplicate id
            DimensionMismatchError: embedding override of the wrong dimension
        """
        items, overrides = load_examples(path, embedder.dimension)
        store = cls.from_texts(items, embedder, fit_idf=fit_idf, overrides=overrides)
        logger.info("Loaded %d demonstration examples from %s", len(store), path)
        return store

    def embed(self, tokens: Sequence[str]) -> np.ndarray:
        return self.embedder.embed(tokens)

    def cluster(self, config: StoreConfig) -> np.ndarray:
        """
        Mean-shift labels for every example.

        Labels are cached per clustering configuration. Without clustering
        every example belongs to cluster 0.

        Returns:
            Integer label per example, in store order
        """
        key = (config.do_clustering, config.bandwidth, config.max_iterations,
               config.shift_tolerance, config.cluster_seed)
        cached = self._labels.get(key)
        if cached is not None:
            return cached

        if len(self) == 0:
            labels = np.zeros(0, dtype=int)
        elif not config.do_clustering:
            labels = np.zeros(len(self), dtype=int)
        else:
            shift = MeanShift(
                bandwidth=config.bandwidth,
                max_iter=config.max_iterations,
                tol=config.shift_tolerance,
                normalize=True,
                seed=config.cluster_seed,
            ).fit(self.matrix)
            labels = shift.labels_
            logger.info(
                "Clustered %d examples into %d clusters (bandwidth %.4f, converged=%s)",
                len(self), len(shift.cluster_centers_), shift.bandwidth_, shift.converged_
            )
        labels.setflags(write=False)
        self._labels[key] = labels
        return labels

    def sample_representatives(
        self,
        labels: Sequence[int],
        ratio: float,
        seed: int
    ) -> "DemonstrationStore":
        """
        Keep ceil(ratio * s) examples, drawn uniformly at random, from every cluster of size s.

        Args:
            labels: Cluster label per example
            ratio: Proportion kept per cluster, in (0, 1]
            seed: Sampling seed

        Returns:
            Subset store preserving the original example order
        """
        if not 0 < ratio <= 1:
            raise ValueError("Ratio must be in (0, 1]")
        labels = np.asarray(labels, dtype=int)
        if len(labels) != len(self):
            raise ValueError("Every example needs a cluster label")

        rng = np.random.default_rng(seed)
        keep = np.zeros(len(self), dtype=bool)
        for label in sorted(set(labels.tolist())):
            members = np.flatnonzero(labels == label)
            quota = ceil_quota(ratio, len(members))
            keep[rng.choice(members, size=quota, replace=False)] = True

        examples = [
            replace(ex, cluster=int(label))
            for ex, label, kept in zip(self.examples, labels, keep) if kept
        ]
        return DemonstrationStore(examples, self.embedder)

    def representatives(self, config: StoreConfig, seed: int) -> "DemonstrationStore":
        """
        The subset the validator compares against.

        The full store is returned when clustering is disabled or the ratio is 1.
        """
        if len(self) == 0 or not config.do_clustering or config.ratio_R >= 1:
            return self
        subset = self.sample_representatives(self.cluster(config), config.ratio_R, seed)
        logger.debug("Sampled %d of %d examples (R=%g, seed=%d)",
                     len(subset), len(self), config.ratio_R, seed)
        return subset

    def max_similarity(self, vector: np.ndarray) -> Tuple[float, Optional[str]]:
        """
        Highest cosine similarity to any example and the id achieving it.

        Ties go to the lexicographically smallest id. An empty store scores 0.
        """
        scan = self.max_similarity_many(np.asarray(vector, dtype=float)[None, :])
        return float(scan.max_scores[0]), scan.nearest_ids[0]

    def max_similarity_many(self, vectors: np.ndarray) -> SimilarityScan:
        """
        Vectorized ``max_similarity`` over a batch of candidate vectors.

        Args:
            vectors: Candidate embeddings, shape (n, dimension)

        Returns:
            SimilarityScan with per-candidate max, argmax id and min
        """
        vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
        if vectors.shape[1] != self.embedder.dimension:
            raise DimensionMismatchError(
                f"Candidate dimension {vectors.shape[1]} does not match store "
                f"dimension {self.embedder.dimension}"
            )
        n = len(vectors)
        if len(self) == 0:
            return SimilarityScan(np.zeros(n), [None] * n, np.zeros(n))

        norms = np.linalg.norm(vectors, axis=1)
        denominator = np.outer(norms, self._norms)
        with np.errstate(divide="ignore", invalid="ignore"):
            sims = np.where(denominator > 0, (vectors @ self.matrix.T) / denominator, 0.0)
        sims = np.clip(sims, -1.0, 1.0)

        max_scores = sims.max(axis=1)
        nearest = []
        for row, best in zip(sims, max_scores):
            tied = np.flatnonzero(row == best)
            nearest.append(self.ids[tied[np.argmin(self._id_rank[tied])]])
        return SimilarityScan(max_scores, nearest, sims.min(axis=1))

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)

    def __repr__(self) -> str:
        return f"DemonstrationStore(examples={len(self)}, dimension={self.embedder.dimension})"


def _normalized(values, dimension: int, ex_id: str) -> np.ndarray:
    vector = np.asarray(values, dtype=float)
    if vector.shape != (dimension,):
        raise DimensionMismatchError(
            f"Embedding of example {ex_id!r} has shape {vector.shape}, expected ({dimension},)"
        )
    norm = np.linalg.norm(vector)
    return vector / norm if norm > 0 else vector


def load_examples(
    path: Union[str, Path],
    dimension: int
) -> Tuple[List[Tuple[str, str]], Dict[str, np.ndarray]]:
    """
    Parse a demonstration-example JSON Lines file.

    Args:
        path: File with one {"id": str, "text": str, "embedding"?: [float]} object per line
        dimension: Required length of embedding overrides

    Returns:
        (list of (id, text), id -> normalized embedding override)
    """
    items: List[Tuple[str, str]] = []
    overrides: Dict[str, np.ndarray] = {}
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise StoreFormatError(str(path), line_no, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise StoreFormatError(str(path), line_no, "expected a JSON object")
            if "id" not in record or "text" not in record:
                raise StoreFormatError(str(path), line_no, "missing 'id' or 'text'")

            ex_id = str(record["id"])
            if ex_id in seen:
                raise StoreFormatError(str(path), line_no, f"duplicate id {ex_id!r}")
            seen.add(ex_id)
            items.append((ex_id, str(record["text"])))

            if record.get("embedding") is not None:
                overrides[ex_id] = _normalized(record["embedding"], dimension, ex_id)
    return items, overrides
