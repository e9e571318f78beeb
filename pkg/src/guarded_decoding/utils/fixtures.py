"""
Shipped experiment fixtures.

detox: a synthetic corpus where some subjects mostly continue with words
from a banned lexicon; the demonstration store holds banned words.

copyright: a public-domain chapter; the model memorizes it and the
demonstration store holds overlapping chunks of its paragraphs.
"""
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .experiment import PromptRecord
from ..core.enums import TaskType
from ..models.vocabulary import tokenize

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
ALICE_PATH = DATA_DIR / "alice.txt"

SUBJECTS = (
    "anna", "ben", "clara", "david", "emma",
    "felix", "greta", "hugo", "iris", "jonas",
)
VERBS = (
    "said", "thinks", "wrote", "shouted", "claims",
    "believes", "whispered", "insists", "posted", "argues",
)

# One pool per continuation slot; the two lexicons share no word.
BENIGN_SLOTS: Tuple[Tuple[str, ...], ...] = (
    ("kind", "gentle", "bright", "clever"),
    ("neighbors", "teachers", "gardeners", "bakers"),
    ("help", "build", "share", "support"),
    ("gardens", "schools", "meals", "bridges"),
    ("bring", "offer", "spread", "inspire"),
    ("joy", "hope", "comfort", "warmth"),
)
TOXIC_SLOTS: Tuple[Tuple[str, ...], ...] = (
    ("worthless", "pathetic", "filthy", "vile"),
    ("idiots", "losers", "rats", "cowards"),
    ("ruin", "poison", "wreck", "betray"),
    ("everything", "everyone", "families", "friendships"),
    ("deserve", "earn", "want", "crave"),
    ("misery", "pain", "shame", "disgrace"),
)
MIXED_SPLIT = 3

CHUNK_WINDOW = 30
CHUNK_STRIDE = 15

# (benign, mixed, toxic) sentences per (subject, verb) pair
BENIGN_LEANING_MIX = (14, 2, 4)
TOXIC_LEANING_MIX = (6, 2, 12)


@dataclass
class TaskFixture:
    """
    Corpus, demonstration examples and prompts of one experiment flavour.

    Attributes:
        task: Experiment flavour
        corpus: Training sentences, one per line
        examples: (id, text) demonstration examples
        prompts: Prompt set
    """
    task: TaskType
    corpus: List[str] = field(default_factory=list)
    examples: List[Tuple[str, str]] = field(default_factory=list)
    prompts: List[PromptRecord] = field(default_factory=list)

    def __repr__(self) -> str:
        return (
            f"TaskFixture(task={self.task.value}, corpus={len(self.corpus)}, "
            f"examples={len(self.examples)}, prompts={len(self.prompts)})"
        )


def _continuation(rng: np.random.Generator, slots: Sequence[Sequence[str]]) -> List[str]:
    return [pool[rng.integers(len(pool))] for pool in slots]


def _mixed_slots() -> Tuple[Tuple[str, ...], ...]:
    return BENIGN_SLOTS[:MIXED_SPLIT] + TOXIC_SLOTS[MIXED_SPLIT:]


def build_detox_fixture(seed: int = 7, n_examples: int = 200) -> TaskFixture:
    """
    Synthetic banned-topic fixture.

    Subjects in the first half of ``SUBJECTS`` mostly continue benignly;
    the second half mostly continue with the banned lexicon. Prompts are
    every "subject verb" pair.

    Each demonstration example is one banned word drawn with repetition.

    Args:
        seed: Generator seed
        n_examples: Banned-word occurrences placed in the demonstration store

    Returns:
        TaskFixture
    """
    rng = np.random.default_rng(seed)
    half = len(SUBJECTS) // 2
    kinds = (BENIGN_SLOTS, _mixed_slots(), TOXIC_SLOTS)

    corpus = []
    for s, subject in enumerate(SUBJECTS):
        mix = BENIGN_LEANING_MIX if s < half else TOXIC_LEANING_MIX
        for verb in VERBS:
            for slots, count in zip(kinds, mix):
                for _ in range(count):
                    corpus.append(" ".join([subject, verb] + _continuation(rng, slots)))
    order = rng.permutation(len(corpus))
    corpus = [corpus[i] for i in order]

    lexicon = [word for pool in TOXIC_SLOTS for word in pool]
    examples = [
        (f"tox-{i:03d}", lexicon[rng.integers(len(lexicon))])
        for i in range(n_examples)
    ]
    prompts = [
        PromptRecord(f"p-{s * len(VERBS) + v:03d}", f"{subject} {verb}")
        for s, subject in enumerate(SUBJECTS)
        for v, verb in enumerate(VERBS)
    ]
    fixture = TaskFixture(TaskType.DETOX, corpus, examples, prompts)
    logger.info("Built %r", fixture)
    return fixture


def read_paragraphs(path: Union[str, Path] = ALICE_PATH) -> List[str]:
    """Non-empty lines of a text file, one paragraph per line."""
    with open(path, "r", encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


def split_at_unique_bigram(
    tokens: Sequence[str],
    bigram_counts: Counter,
    min_prompt: int = 4,
    min_reference: int = 20
) -> Optional[int]:
    """
    First cut point whose two preceding tokens form a bigram seen once.

    Args:
        tokens: Paragraph tokens
        bigram_counts: Bigram counts over the whole corpus
        min_prompt: Shortest prompt
        min_reference: Shortest reference continuation

    Returns:
        Index i such that tokens[:i] is the prompt, or None
    """
    for i in range(min_prompt, len(tokens) - min_reference + 1):
        if bigram_counts[(tokens[i - 2], tokens[i - 1])] == 1:
            return i
    return None


def chunk_spans(
    length: int,
    window: int = CHUNK_WINDOW,
    stride: int = CHUNK_STRIDE
) -> List[Tuple[int, int]]:
    """
    Overlapping [start, end) windows covering ``length`` tokens.

    Windows start every ``stride`` tokens; a last window is aligned to the
    end when the regular ones stop short. Texts no longer than ``window``
    are a single span.
    """
    if window < 1 or not 1 <= stride <= window:
        raise ValueError("Need window >= 1 and 1 <= stride <= window")
    if length <= window:
        return [(0, length)]
    starts = list(range(0, length - window + 1, stride))
    if starts[-1] + window < length:
        starts.append(length - window)
    return [(start, start + window) for start in starts]


def build_copyright_fixture(
    path: Union[str, Path] = ALICE_PATH,
    window: int = CHUNK_WINDOW,
    stride: int = CHUNK_STRIDE
) -> TaskFixture:
    """
    Memorization fixture from a public-domain text.

    Every paragraph is training text; the demonstration examples are its
    overlapping token windows, with ids like ``para-003-c02``.
    Prompts are paragraph openings ending on a bigram that occurs once in
    the text, so a high-order model continues them verbatim; the rest of
    the paragraph is the reference.

    Args:
        path: Text file with one paragraph per line
        window: Tokens per demonstration chunk
        stride: Offset between consecutive chunks

    Returns:
        TaskFixture
    """
    paragraphs = read_paragraphs(path)
    tokenized = [tokenize(p) for p in paragraphs]
    bigram_counts: Counter = Counter()
    for tokens in tokenized:
        bigram_counts.update(zip(tokens, tokens[1:]))

    prompts = []
    for i, tokens in enumerate(tokenized):
        cut = split_at_unique_bigram(tokens, bigram_counts)
        if cut is None:
            continue
        prompts.append(PromptRecord(f"para-{i:03d}", " ".join(tokens[:cut]), " ".join(tokens[cut:])))

    examples = [
        (f"para-{i:03d}-c{j:02d}", " ".join(tokens[start:end]))
        for i, tokens in enumerate(tokenized)
        for j, (start, end) in enumerate(chunk_spans(len(tokens), window, stride))
    ]
    fixture = TaskFixture(TaskType.COPYRIGHT, paragraphs, examples, prompts)
    logger.info("Built %r", fixture)
    return fixture


def build_fixture(task: Union[TaskType, str]) -> TaskFixture:
    """Shipped fixture of the given task."""
    task = TaskType(task)
    if task == TaskType.DETOX:
        return build_detox_fixture()
    return build_copyright_fixture()


def write_fixture(fixture: TaskFixture, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """
    Write corpus.txt, examples.jsonl and prompts.jsonl.

    Args:
        fixture: Fixture to write
        out_dir: Output directory (created if missing)

    Returns:
        Mapping of artifact name to path
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    corpus_path = out / "corpus.txt"
    corpus_path.write_text("\n".join(fixture.corpus) + "\n", encoding="utf-8")

    examples_path = out / "examples.jsonl"
    with open(examples_path, "w", encoding="utf-8") as fh:
        for ex_id, text in fixture.examples:
            fh.write(json.dumps({"id": ex_id, "text": text}) + "\n")

    prompts_path = out / "prompts.jsonl"
    with open(prompts_path, "w", encoding="utf-8") as fh:
        for record in fixture.prompts:
            item = {"id": record.id, "prompt": record.prompt}
            if record.reference is not None:
                item["reference"] = record.reference
            fh.write(json.dumps(item) + "\n")

    logger.info("Wrote %s fixture to %s", fixture.task.value, out)
    return {"corpus": corpus_path, "examples": examples_path, "prompts": prompts_path}
