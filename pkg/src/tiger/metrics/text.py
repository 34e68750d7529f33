"""Text accuracy metrics: edit distance and the Levenshtein-ratio score."""

from __future__ import annotations


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance (insert/delete/substitute), iterative DP."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def ocr_accuracy(s_pred: str, s_gt: str) -> float:
    """Levenshtein ratio in [0, 1]; two empty strings count as perfect agreement."""
    total = len(s_pred) + len(s_gt)
    if total == 0:
        return 1.0
    return (total - levenshtein(s_pred, s_gt)) / total
