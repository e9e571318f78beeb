"""
Output scoring: violation score and per-run report assembly.
"""
import logging
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np

from .lcs import lcs, lcs_norm, longest_common_substring
from ..core.exceptions import InfinitePerplexityError
from ..core.parameters import OutputMetrics, RunReport
from ..models.ngram import NgramModel
from ..similarity.store import DemonstrationStore

logger = logging.getLogger(__name__)


def violation_score(tokens: Sequence[str], store: DemonstrationStore) -> float:
    """
    Max cosine similarity between an output and the demonstration examples.

    Score against the full store, not the sampled subset, so the value
    does not depend on the sampling ratio.

    Args:
        tokens: Output words
        store: Demonstration store

    Returns:
        Similarity of the nearest example; 0 for an empty store
    """
    if len(store) == 0:
        return 0.0
    score, _ = store.max_similarity(store.embed(tokens))
    return score


def violation_rate(scores: Sequence[float], thrv: float) -> float:
    """Share of outputs whose violation score is at or above ``thrv``."""
    if len(scores) == 0:
        return 0.0
    return float(np.mean(np.asarray(scores, dtype=float) >= thrv))


def build_run_report(
    report: RunReport,
    model: NgramModel,
    prompt: Sequence[int],
    store: DemonstrationStore,
    reference: Optional[Sequence[str]] = None
) -> RunReport:
    """
    Attach perplexity, LCS and violation scores to every output of a run.

    Args:
        report: Engine result
        model: Model that produced the outputs
        prompt: Prompt token ids
        store: Full demonstration store
        reference: Reference continuation words for LCS, if any

    Returns:
        Copy of ``report`` with ``metrics`` filled
    """
    vocab = model.vocabulary
    metrics = []
    for cand in report.outputs:
        words = vocab.decode(t for t in cand.tokens if t != vocab.eos_id)
        try:
            ppl: Optional[float] = model.perplexity(cand.tokens, history=prompt)
        except InfinitePerplexityError as exc:
            logger.debug("Output %r: %s", " ".join(words), exc)
            ppl = None

        entry = OutputMetrics(
            text=" ".join(words),
            length=len(words),
            ppl=ppl,
            violation_score=violation_score(words, store),
        )
        if reference is not None:
            entry.lcs = lcs(words, reference)
            entry.substring = longest_common_substring(words, reference)
            if words:
                entry.lcs_norm = lcs_norm(entry.lcs, len(words))
        metrics.append(entry)
    return replace(report, metrics=metrics)
