"""
Whitespace tokenizer and token vocabulary.
"""
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

logger = logging.getLogger(__name__)

EOS = "</s>"
UNK = "<unk>"
RESERVED_TOKENS: Tuple[str, ...] = (EOS, UNK)


def tokenize(text: str) -> List[str]:
    """Lowercase and split on Unicode whitespace."""
    return text.lower().split()


class Vocabulary:
    """
    Bijective mapping between token strings and dense ids 0..|V|-1.

    Reserved tokens always occupy the lowest ids, in the order of
    ``RESERVED_TOKENS``; remaining tokens follow in first-seen order.
    """

    def __init__(self, tokens: Sequence[str]):
        """
        Initialize vocabulary.

        Args:
            tokens: Ordered token strings; must be unique and contain every reserved token
        """
        self.tokens: List[str] = list(tokens)
        self.index: Dict[str, int] = {tok: i for i, tok in enumerate(self.tokens)}

        if len(self.index) != len(self.tokens):
            raise ValueError("Vocabulary tokens must be unique")
        for reserved in RESERVED_TOKENS:
            if reserved not in self.index:
                raise ValueError(f"Vocabulary must contain reserved token {reserved!r}")

    @classmethod
    def build(cls, streams: Iterable[Iterable[str]]) -> "Vocabulary":
        """Build a vocabulary from token streams plus the reserved tokens."""
        tokens = list(RESERVED_TOKENS)
        seen = set(tokens)
        for stream in streams:
            for tok in stream:
                if tok not in seen:
                    seen.add(tok)
                    tokens.append(tok)
        return cls(tokens)

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "Vocabulary":
        """Vocabulary of the given tokens plus the reserved ones."""
        return cls.build([tokens])

    @property
    def eos_id(self) -> int:
        return self.index[EOS]

    @property
    def unk_id(self) -> int:
        return self.index[UNK]

    def encode(self, tokens: Iterable[str]) -> List[int]:
        """Map tokens to ids; out-of-vocabulary tokens become ``<unk>``."""
        unk = self.unk_id
        return [self.index.get(tok, unk) for tok in tokens]

    def decode(self, ids: Iterable[int]) -> List[str]:
        return [self.tokens[i] for i in ids]

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and self.tokens == other.tokens

    def __repr__(self) -> str:
        return f"Vocabulary(size={len(self)})"


def load_corpus(paths: Iterable[Union[str, Path]]) -> List[str]:
    """
    Read UTF-8 text files into a single token stream.

    Every non-empty line is treated as one sentence and followed by EOS.

    Args:
        paths: Corpus files

    Returns:
        Token stream with EOS at sentence boundaries
    """
    stream: List[str] = []
    for path in paths:
        n_lines = 0
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                tokens = tokenize(line)
                if not tokens:
                    continue
                stream.extend(tokens)
                stream.append(EOS)
                n_lines += 1
        logger.info("Loaded %d sentences from %s", n_lines, path)
    return stream
