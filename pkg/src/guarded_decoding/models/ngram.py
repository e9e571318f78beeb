"""
Add-k smoothed n-gram language model with perplexity scoring.
"""
import json
import logging
import math
from collections import defaultdict
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .base import LanguageModel
from .vocabulary import Vocabulary
from ..core.exceptions import EmptyCorpusError, InfinitePerplexityError

logger = logging.getLogger(__name__)

FORMAT_NAME = "guarded-decoding/ngram"
FORMAT_VERSION = 1

Context = Tuple[int, ...]


class NgramModel(LanguageModel):
    """
    Markov model of fixed order with add-k smoothing.

    P(token | context) = (count(context, token) + k) / (count(context) + k*|V|)

    where context is the last ``order - 1`` tokens. Contexts shorter than that
    are left-padded with EOS. Contexts never seen in training (or any context
    when the smoothed denominator is zero) get the uniform distribution.
    """

    def __init__(
        self,
        vocabulary: Vocabulary,
        order: int,
        smoothing_k: float,
        counts: Dict[Context, Dict[int, int]]
    ):
        """
        Initialize from an explicit count table.

        Args:
            vocabulary: Token vocabulary
            order: Markov order (1 = unigram)
            smoothing_k: Add-k pseudo-count
            counts: context tuple -> {token id: count}
        """
        super().__init__(vocabulary)
        if order < 1:
            raise ValueError("Order must be at least 1")
        if smoothing_k < 0:
            raise ValueError("Smoothing constant must be non-negative")

        self.order = order
        self.smoothing_k = float(smoothing_k)
        self.counts = counts

        size = len(vocabulary)
        self._uniform = np.full(size, 1.0 / size)
        self._dense: Dict[Context, Tuple[np.ndarray, int]] = {}
        for context, row in counts.items():
            if len(context) != order - 1:
                raise ValueError(f"Context {context} does not match order {order}")
            dense = np.zeros(size)
            for tok, count in row.items():
                if count < 0:
                    raise ValueError("Counts must be non-negative")
                dense[tok] = count
            self._dense[context] = (dense, int(dense.sum()))
        self._cache: Dict[Context, np.ndarray] = {}
        self._log_cache: Dict[Context, np.ndarray] = {}

    @classmethod
    def train(
        cls,
        corpus: Sequence[str],
        order: int,
        smoothing_k: float,
        vocabulary: Optional[Vocabulary] = None
    ) -> "NgramModel":
        """
        Count n-grams over a token stream.

        Args:
            corpus: Token stream (EOS tokens mark sentence boundaries)
            order: Markov order
            smoothing_k: Add-k pseudo-count
            vocabulary: Vocabulary to use; built from the corpus when omitted

        Returns:
            Trained model
        """
        if order < 1:
            raise ValueError("Order must be at least 1")
        if len(corpus) == 0 and smoothing_k == 0:
            raise EmptyCorpusError("Empty corpus with k=0 leaves the distribution undefined")

        vocab = vocabulary if vocabulary is not None else Vocabulary.build([corpus])
        ids = vocab.encode(corpus)

        counts: Dict[Context, Dict[int, int]] = defaultdict(lambda: defaultdict(int))
        width = order - 1
        for i in range(width, len(ids)):
            context = tuple(ids[i - width:i])
            counts[context][ids[i]] += 1

        table = {ctx: dict(row) for ctx, row in counts.items()}
        logger.info(
            "Trained order-%d model: %d tokens, %d contexts, |V|=%d, k=%g",
            order, len(ids), len(table), len(vocab), smoothing_k
        )
        return cls(vocab, order, smoothing_k, table)

    def context_key(self, context: Sequence[int]) -> Context:
        """Last ``order - 1`` ids of ``context``, left-padded with EOS."""
        width = self.order - 1
        if width == 0:
            return ()
        tail = tuple(context[-width:])
        if len(tail) < width:
            tail = (self.vocabulary.eos_id,) * (width - len(tail)) + tail
        return tail

    def next_distribution(self, context: Sequence[int]) -> np.ndarray:
        """
        Smoothed conditional distribution given the Markov context.

        Args:
            context: Token ids; only the last ``order - 1`` matter

        Returns:
            Array of shape (|V|,) summing to one
        """
        key = self.context_key(context)
        cached = self._cache.get(key)
        if cached is not None:
            return cached

        entry = self._dense.get(key)
        k = self.smoothing_k
        if entry is None:
            dist = self._uniform
        else:
            dense, total = entry
            denominator = total + k * len(self.vocabulary)
            dist = (dense + k) / denominator if denominator > 0 else self._uniform

        dist.setflags(write=False)
        self._cache[key] = dist
        return dist

    def next_log_distribution(self, context: Sequence[int]) -> np.ndarray:
        key = self.context_key(context)
        cached = self._log_cache.get(key)
        if cached is None:
            cached = super().next_log_distribution(context)
            cached.setflags(write=False)
            self._log_cache[key] = cached
        return cached

    def perplexity(self, tokens: Sequence[int], history: Sequence[int] = ()) -> float:
        """
        exp of the mean negative log-likelihood of ``tokens``.

        Args:
            tokens: Token ids to score (N >= 1)
            history: Conditioning prefix for the first scored token

        Returns:
            Perplexity (>= 1 for proper distributions)

        Raises:
            InfinitePerplexityError: a scored token has probability zero
        """
        if len(tokens) == 0:
            raise ValueError("Perplexity needs at least one token")

        context = list(history)
        total = 0.0
        for position, tok in enumerate(tokens):
            logp = self.next_log_distribution(context)[tok]
            if np.isneginf(logp):
                raise InfinitePerplexityError(position, self.vocabulary.tokens[tok])
            total += float(logp)
            context.append(tok)
        return math.exp(-total / len(tokens))

    def to_dict(self) -> dict:
        """Versioned JSON-serializable document."""
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "order": self.order,
            "smoothing_k": self.smoothing_k,
            "vocabulary": self.vocabulary.tokens,
            "counts": [
                [list(ctx), sorted([tok, count] for tok, count in row.items())]
                for ctx, row in sorted(self.counts.items())
            ],
        }

    @classmethod
    def from_dict(cls, document: dict) -> "NgramModel":
        if document.get("format") != FORMAT_NAME:
            raise ValueError(f"Not an n-gram model document: {document.get('format')!r}")
        if document.get("version") != FORMAT_VERSION:
            raise ValueError(f"Unsupported model version {document.get('version')!r}")
        counts = {
            tuple(ctx): {int(tok): int(count) for tok, count in row}
            for ctx, row in document["counts"]
        }
        return cls(
            Vocabulary(document["vocabulary"]),
            int(document["order"]),
            float(document["smoothing_k"]),
            counts,
        )

    def save(self, path: Union[str, Path]) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)
        logger.info("Saved model to %s", path)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "NgramModel":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def __repr__(self) -> str:
        return (
            f"NgramModel(order={self.order}, k={self.smoothing_k}, "
            f"vocab={len(self.vocabulary)}, contexts={len(self.counts)})"
        )

