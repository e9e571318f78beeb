"""
Shared test doubles and fixture builders.
"""
import json
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from guarded_decoding.models.base import LanguageModel
from guarded_decoding.models.vocabulary import Vocabulary
from guarded_decoding.utils.fixtures import TaskFixture, build_detox_fixture, write_fixture


class TableModel(LanguageModel):
    """
    Bigram-style model driven by an explicit table.

    The distribution depends only on the last token of the context
    (``None`` for an empty context); missing keys use ``default``.
    """

    def __init__(
        self,
        words: Sequence[str],
        table: Dict[Optional[str], Dict[str, float]],
        default: Optional[Dict[str, float]] = None
    ):
        super().__init__(Vocabulary.from_tokens(words))
        size = len(self.vocabulary)
        self._rows: Dict[Optional[int], np.ndarray] = {}
        for key, row in table.items():
            index = None if key is None else self.vocabulary.index[key]
            self._rows[index] = self._dense(row, size)
        self._default = self._dense(default, size) if default else np.full(size, 1.0 / size)

    def _dense(self, row: Dict[str, float], size: int) -> np.ndarray:
        dense = np.zeros(size)
        for tok, p in row.items():
            dense[self.vocabulary.index[tok]] = p
        return dense / dense.sum()

    def next_distribution(self, context: Sequence[int]) -> np.ndarray:
        key = context[-1] if len(context) else None
        return self._rows.get(key, self._default)

    def ids(self, *words: str) -> tuple:
        return tuple(self.vocabulary.index[w] for w in words)


def random_table_model(
    rng: np.random.Generator,
    words: Sequence[str] = ("a", "b", "c")
) -> TableModel:
    """TableModel with strictly positive random rows over every vocabulary token."""
    vocab = Vocabulary.from_tokens(words)
    table = {}
    for key in [None] + list(vocab.tokens):
        probs = rng.dirichlet(np.ones(len(vocab)))
        table[key] = dict(zip(vocab.tokens, probs))
    return TableModel(words, table)


def write_jsonl(path: Path, records: Iterable[dict]) -> Path:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
    return path


def write_lines(path: Path, lines: Iterable[str]) -> Path:
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def single_word_examples(words: Iterable[str]) -> List[dict]:
    """One demonstration example per word; every one-word continuation then scores 1.0."""
    return [{"id": f"w-{i:04d}", "text": w} for i, w in enumerate(sorted(set(words)))]


def small_detox(out_dir: Path, n_prompts: int = 10) -> Dict[str, Path]:
    """Shipped detox fixture files with one prompt per subject."""
    fixture = build_detox_fixture()
    prompts = fixture.prompts[::len(fixture.prompts) // n_prompts][:n_prompts]
    small = TaskFixture(fixture.task, fixture.corpus, fixture.examples, prompts)
    return write_fixture(small, out_dir)


class ExcludingModel(LanguageModel):
    """Wraps a model and removes a set of token sequences from its support."""

    def __init__(self, base: LanguageModel, excluded):
        super().__init__(base.vocabulary)
        self.base = base
        self.excluded = excluded

    def next_distribution(self, context: Sequence[int]) -> np.ndarray:
        probs = np.array(self.base.next_distribution(context), dtype=float)
        for tok in self.excluded.children_of(tuple(context)):
            probs[tok] = 0.0
        return probs / probs.sum()
