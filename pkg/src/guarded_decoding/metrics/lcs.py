"""
Token-level longest common subsequence and substring.
"""
from typing import Hashable, List, Sequence

import numpy as np


def lcs(a: Sequence[Hashable], b: Sequence[Hashable]) -> int:
    """
    Length of the longest common (not necessarily contiguous) subsequence.

    Two-row dynamic programme, O(len(a) * len(b)) time and O(len(b)) space.
    """
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def lcs_norm(lcs_value: int, completion_length: int) -> float:
    """
    LCS normalized by the completion length.

    Args:
        lcs_value: LCS between completion and reference
        completion_length: Completion length in tokens (>= 1)

    Returns:
        Ratio in [0, 1]
    """
    if completion_length < 1:
        raise ValueError("Completion length must be at least 1")
    if not 0 <= lcs_value <= completion_length:
        raise ValueError("LCS cannot exceed the completion length")
    return lcs_value / completion_length


def lcs_table(a: Sequence[Hashable], b: Sequence[Hashable]) -> np.ndarray:
    """Full DP table; entry [i, j] is the LCS of a[:i] and b[:j]."""
    table = np.zeros((len(a) + 1, len(b) + 1), dtype=int)
    for i, x in enumerate(a, start=1):
        for j, y in enumerate(b, start=1):
            if x == y:
                table[i, j] = table[i - 1, j - 1] + 1
            else:
                table[i, j] = max(table[i - 1, j], table[i, j - 1])
    return table


def lcs_traceback(a: Sequence[Hashable], b: Sequence[Hashable]) -> List[Hashable]:
    """One longest common subsequence, recovered from ``lcs_table``."""
    table = lcs_table(a, b)
    i, j = len(a), len(b)
    common = []
    while i > 0 and j > 0:
        if a[i - 1] == b[j - 1]:
            common.append(a[i - 1])
            i -= 1
            j -= 1
        elif table[i - 1, j] >= table[i, j - 1]:
            i -= 1
        else:
            j -= 1
    return common[::-1]


def longest_common_substring(a: Sequence[Hashable], b: Sequence[Hashable]) -> int:
    """Length of the longest contiguous run shared by ``a`` and ``b``."""
    best = 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            if x == y:
                cur[j] = prev[j - 1] + 1
                if cur[j] > best:
                    best = cur[j]
        prev = cur
    return best
