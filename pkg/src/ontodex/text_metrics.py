"""String primitives: normalization, Levenshtein distance, name similarity and
description overlap."""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional

_WS_RE = re.compile(r"\s+")
_TOKEN_SPLIT_RE = re.compile(r"[^\w]+|_+")

# Minimal English list; replace with --stopwords for anything serious.
DEFAULT_STOP_WORDS = frozenset(
    """
    a an and are as at be been but by for from has have he her his i if in into
    is it its of on or our she so such that the their them then there these they
    this to was we were what when where which who will with you your
    """.split()
)


def normalize(s: str) -> str:
    """Case-fold, map underscores to spaces, trim and collapse whitespace."""
    return _WS_RE.sub(" ", s.replace("_", " ")).strip().casefold()


def tokenize(s: str) -> List[str]:
    """Split normalized text on any non-alphanumeric character."""
    return [t for t in _TOKEN_SPLIT_RE.split(normalize(s)) if t]


def levenshtein(s1: str, s2: str) -> int:
    """Minimum number of single-character insertions, deletions and
    substitutions turning ``s1`` into ``s2``."""
    if s1 == s2:
        return 0
    if len(s1) < len(s2):
        s1, s2 = s2, s1
    if not s2:
        return len(s1)
    prev = list(range(len(s2) + 1))
    for i, c1 in enumerate(s1, 1):
        cur = [i]
        for j, c2 in enumerate(s2, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (c1 != c2)))
        prev = cur
    return prev[-1]


def bounded_levenshtein(s1: str, s2: str, limit: int) -> Optional[int]:
    """Levenshtein distance if it is strictly below ``limit``, else None.

    Only the diagonal band |i - j| < limit is filled; cells outside it are at
    least ``limit`` and are held at that cap. Stops early once a whole row
    reaches the cap, since row minima never decrease.
    """
    if limit <= 0:
        return None
    if abs(len(s1) - len(s2)) >= limit:
        return None
    if s1 == s2:
        return 0
    if len(s1) < len(s2):
        s1, s2 = s2, s1
    n2 = len(s2)
    cap = limit
    prev = [j if j < cap else cap for j in range(n2 + 1)]
    for i in range(1, len(s1) + 1):
        c1 = s1[i - 1]
        cur = [cap] * (n2 + 1)
        first = i if i < cap else cap
        cur[0] = first
        row_min = first
        for j in range(max(1, i - limit + 1), min(n2, i + limit - 1) + 1):
            v = prev[j - 1] + (c1 != s2[j - 1])
            if prev[j] + 1 < v:
                v = prev[j] + 1
            if cur[j - 1] + 1 < v:
                v = cur[j - 1] + 1
            if v > cap:
                v = cap
            cur[j] = v
            if v < row_min:
                row_min = v
        if row_min >= cap:
            return None
        prev = cur
    return prev[n2] if prev[n2] < cap else None


def name_similarity(s1: str, s2: str) -> float:
    """1 - levenshtein / max length, in [0, 1]. Inputs are expected normalized."""
    longest = max(len(s1), len(s2))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(s1, s2) / longest


@dataclass(frozen=True)
class StopWordList:
    words: frozenset

    def __post_init__(self):
        cleaned = frozenset(normalize(w) for w in self.words)
        if "" in cleaned:
            raise ValueError("stop word list contains an empty entry")
        object.__setattr__(self, "words", cleaned)

    def __contains__(self, token: str) -> bool:
        return token in self.words

    @classmethod
    def default(cls) -> "StopWordList":
        return cls(DEFAULT_STOP_WORDS)

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "StopWordList":
        return cls(frozenset(w for w in (normalize(line) for line in lines) if w))

    @classmethod
    def load(cls, path) -> "StopWordList":
        return cls.from_lines(Path(path).read_text(encoding="utf-8").splitlines())


def content_tokens(text: str, stops: StopWordList) -> frozenset:
    return frozenset(t for t in tokenize(text) if t not in stops)


def description_overlap(description: str, doc_text: str, stops: StopWordList) -> float:
    """Jaccard coefficient of the stop-word-filtered token sets (kd)."""
    a = content_tokens(description, stops)
    b = content_tokens(doc_text, stops)
    if not a or not b:
        return 0.0
    return len(a & b) / len(a | b)
