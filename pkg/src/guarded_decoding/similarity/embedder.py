"""
Feature-hashed TF-IDF text embedder and cosine similarity kernel.
"""
import hashlib
import logging
import math
from collections import Counter
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..core.exceptions import DimensionMismatchError

logger = logging.getLogger(__name__)

DEFAULT_DIMENSION = 256
DEFAULT_HASH_SEED = 13


def text_features(tokens: Sequence[str]) -> List[str]:
    """Unigram and bigram feature names of a token sequence."""
    features = [f"u:{tok}" for tok in tokens]
    features.extend(f"b:{a} {b}" for a, b in zip(tokens, tokens[1:]))
    return features


@lru_cache(maxsize=1 << 18)
def hash_feature(feature: str, hash_seed: int, dimension: int) -> Tuple[int, float]:
    """
    Bucket and sign of a feature.

    h = blake2b(f"{seed}:{feature}") read as a 64-bit little-endian integer;
    bucket = h mod dimension, sign = -1 when the top bit is set.
    """
    digest = hashlib.blake2b(f"{hash_seed}:{feature}".encode("utf-8"), digest_size=8).digest()
    h = int.from_bytes(digest, "little")
    sign = -1.0 if (h >> 63) & 1 else 1.0
    return h % dimension, sign


class HashingEmbedder:
    """
    Signed feature-hashing embedder over TF-IDF weighted unigrams and bigrams.

    The IDF table is frozen at construction. Use ``fit`` to derive a new
    embedder whose table comes from a document collection; an unfitted
    embedder weights every feature with 1.
    """

    def __init__(
        self,
        dimension: int = DEFAULT_DIMENSION,
        hash_seed: int = DEFAULT_HASH_SEED,
        document_frequency: Optional[Dict[str, int]] = None,
        n_documents: int = 0
    ):
        """
        Initialize embedder.

        Args:
            dimension: Embedding dimension (>= 2)
            hash_seed: Seed mixed into the feature hash
            document_frequency: Feature -> number of documents containing it
            n_documents: Size of the collection the frequencies came from
        """
        if dimension < 2:
            raise ValueError("Embedding dimension must be at least 2")
        if n_documents < 0:
            raise ValueError("Document count must be non-negative")

        self.dimension = dimension
        self.hash_seed = hash_seed
        self.n_documents = n_documents
        self._document_frequency = dict(document_frequency or {})

    def fit(self, documents: Iterable[Sequence[str]]) -> "HashingEmbedder":
        """
        Derive a frozen embedder with IDF from ``documents``.

        Args:
            documents: Token sequences (one per document)

        Returns:
            New embedder sharing dimension and seed
        """
        df: Counter = Counter()
        n_docs = 0
        for tokens in documents:
            df.update(set(text_features(tokens)))
            n_docs += 1
        logger.debug("Fitted IDF on %d documents, %d features", n_docs, len(df))
        return HashingEmbedder(self.dimension, self.hash_seed, dict(df), n_docs)

    def idf(self, feature: str) -> float:
        """Smoothed IDF: ln((1 + N) / (1 + df)) + 1."""
        df = self._document_frequency.get(feature, 0)
        return math.log((1 + self.n_documents) / (1 + df)) + 1.0

    def embed(self, tokens: Sequence[str]) -> np.ndarray:
        """
        Unit-normalized embedding of a token sequence.

        Args:
            tokens: Token strings

        Returns:
            Vector of shape (dimension,); the zero vector for empty input
        """
        vector = np.zeros(self.dimension)
        if len(tokens) == 0:
            return vector

        for feature, tf in Counter(text_features(tokens)).items():
            bucket, sign = hash_feature(feature, self.hash_seed, self.dimension)
            vector[bucket] += sign * tf * self.idf(feature)

        norm = np.linalg.norm(vector)
        if norm == 0:
            return np.zeros(self.dimension)
        return vector / norm

    def embed_many(self, texts: Iterable[Sequence[str]]) -> np.ndarray:
        """Stack embeddings into an (n, dimension) matrix."""
        rows = [self.embed(tokens) for tokens in texts]
        if not rows:
            return np.zeros((0, self.dimension))
        return np.vstack(rows)

    def __repr__(self) -> str:
        return (
            f"HashingEmbedder(dimension={self.dimension}, hash_seed={self.hash_seed}, "
            f"documents={self.n_documents})"
        )


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """
    Cosine similarity, defined as 0 when either vector is zero.

    Args:
        a: First vector
        b: Second vector of the same dimension

    Returns:
        Similarity in [-1, 1]
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"Cannot compare vectors of shape {a.shape} and {b.shape}")

    norm_a = np.linalg.norm(a)
    norm_b = np.linalg.norm(b)
    if norm_a == 0 or norm_b == 0:
        return 0.0
    value = float(np.dot(a, b) / (norm_a * norm_b))
    return min(1.0, max(-1.0, value))
