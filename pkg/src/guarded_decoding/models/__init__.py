"""Language models and tokenization."""

from .base import LanguageModel
from .ngram import NgramModel
from .vocabulary import EOS, UNK, Vocabulary, load_corpus, tokenize

__all__ = [
    "LanguageModel",
    "NgramModel",
    "Vocabulary",
    "EOS",
    "UNK",
    "load_corpus",
    "tokenize",
]
