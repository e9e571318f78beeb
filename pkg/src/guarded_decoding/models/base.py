"""
Base abstract class for next-token distribution providers.
"""
from abc import ABC, abstractmethod
from typing import Sequence

import numpy as np

from .vocabulary import Vocabulary


class LanguageModel(ABC):
    """
    Abstract autoregressive model over a fixed vocabulary.

    Implementations return proper distributions: entries are non-negative
    and sum to one. Instances are immutable once built so concurrent
    queries are safe.
    """

    def __init__(self, vocabulary: Vocabulary):
        self.vocabulary = vocabulary

    @abstractmethod
    def next_distribution(self, context: Sequence[int]) -> np.ndarray:
        """
        Probability of every vocabulary token following ``context``.

        Args:
            context: Token ids generated so far (prompt included)

        Returns:
            Array of shape (|V|,)
        """

    def next_log_distribution(self, context: Sequence[int]) -> np.ndarray:
        """Natural-log probabilities; zero probability maps to -inf."""
        with np.errstate(divide="ignore"):
            return np.log(self.next_distribution(context))

    def sequence_log_likelihood(self, context: Sequence[int], tokens: Sequence[int]) -> float:
        """
        Sum of log p(b_j | context, b_<j) accumulated left to right.

        Args:
            context: Conditioning prefix
            tokens: Continuation to score

        Returns:
            Cumulative log-likelihood
        """
        history = list(context)
        total = 0.0
        for tok in tokens:
            total = total + self.next_log_distribution(history)[tok]
            history.append(tok)
        return float(total)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(vocab={len(self.vocabulary)})"
