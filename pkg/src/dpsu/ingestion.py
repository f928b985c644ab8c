"""Corpus loading, n-gram extraction, synthetic Zipf corpora and corpus statistics.

Input formats
-------------
JSONL, one record per line, either raw text or pre-tokenized items::

    {"user_id": "alice", "text": "The cat sat."}
    {"user_id": "bob", "items": ["cat", "dog"]}

TSV, pre-tokenized, items separated by single spaces::

    alice<TAB>the cat sat
    bob<TAB>cat dog

A user may appear on several lines; their item sets are unioned. Users
whose union is empty are dropped.
"""

from __future__ import annotations

import json
import os
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

from dpsu.core import Database, UserRecord

_URL = re.compile(r"(?:[a-z][a-z0-9+.-]*://|www\.)\S*", re.IGNORECASE)
_SYMBOL = re.compile(r"[^\w\s]|_")

DEFAULT_THRESHOLDS = (1, 10, 50, 100, 300)


class CorpusFormatError(ValueError):
    """A corpus line could not be parsed; ``lineno`` is 1-based."""

    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno


def tokenize(text: str, n: int = 1) -> set:
    """Set of lowercase word n-grams after stripping URLs and symbols."""
    if n < 1:
        raise ValueError("n must be at least 1")
    text = _URL.sub(" ", text)
    words = _SYMBOL.sub(" ", text).lower().split()
    return {" ".join(words[j:j + n]) for j in range(len(words) - n + 1)}


@dataclass(frozen=True)
class CorpusRecord:
    user_id: str
    text: str | None = None
    items: tuple | None = None

    def __post_init__(self):
        if (self.text is None) == (self.items is None):
            raise ValueError("a corpus record carries exactly one of text/items")

    def item_set(self, n: int = 1) -> set:
        if self.text is not None:
            return tokenize(self.text, n)
        return set(self.items)


def _parse_jsonl(line, path, lineno):
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(path, lineno, f"invalid JSON ({exc.msg})") from None
    if not isinstance(obj, dict) or "user_id" not in obj:
        raise CorpusFormatError(path, lineno, "expected an object with a user_id")
    text, items = obj.get("text"), obj.get("items")
    if (text is None) == (items is None):
        raise CorpusFormatError(path, lineno, "need exactly one of 'text' or 'items'")
    if text is not None and not isinstance(text, str):
        raise CorpusFormatError(path, lineno, "'text' must be a string")
    if items is not None and not (isinstance(items, list)
                                  and all(isinstance(x, str) for x in items)):
        raise CorpusFormatError(path, lineno, "'items' must be a list of strings")
    return CorpusRecord(str(obj["user_id"]), text=text,
                        items=None if items is None else tuple(items))


def _parse_tsv(line, path, lineno):
    user_id, sep, rest = line.partition("\t")
    if not sep or not user_id:
        raise CorpusFormatError(path, lineno, "expected 'user_id<TAB>items'")
    return CorpusRecord(user_id, items=tuple(x for x in rest.split(" ") if x))


def _infer_format(path):
    ext = os.path.splitext(str(path))[1].lower()
    if ext in (".tsv", ".tab", ".txt"):
        return "tsv"
    return "jsonl"


def read_records(path, format=None):
    """Yield :class:`CorpusRecord` objects from a JSONL or TSV file."""
    fmt = (format or _infer_format(path)).lower()
    if fmt not in ("jsonl", "tsv"):
        raise ValueError(f"unknown corpus format {format!r}")
    parse = _parse_jsonl if fmt == "jsonl" else _parse_tsv
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            yield parse(line, path, lineno)


def records_to_database(records, n: int = 1) -> Database:
    sets = defaultdict(set)
    for rec in records:
        sets[rec.user_id].update(rec.item_set(n))
    users = [UserRecord(uid, frozenset(items)) for uid, items in sorted(sets.items()) if items]
    return Database(tuple(users))


def load_corpus(path, format=None, n: int = 1) -> Database:
    """Load a corpus file, union each user's items, drop empty users.

    Users come back sorted by id, so the result does not depend on line order.
    """
    return records_to_database(read_records(path, format), n)


def write_tsv(db: Database, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for user in db.users:
            fh.write(f"{user.user_id}\t{' '.join(sorted(user.items))}\n")


# -- synthetic corpus ---------------------------------------------------------

@dataclass(frozen=True)
class LognormalSetSize:
    mu: float = 3.0
    sigma: float = 1.0

    def draw(self, rng, vocab_size):
        k = int(round(rng.lognormal(self.mu, self.sigma)))
        return min(max(k, 1), vocab_size)


def _sample_distinct(rng, cdf, k):
    """k distinct ranks drawn proportionally to the Zipf weights (successive sampling)."""
    vocab = len(cdf)
    if 2 * k > vocab:
        probs = np.diff(cdf, prepend=0.0)
        return rng.choice(vocab, size=k, replace=False, p=probs / probs.sum())
    chosen = {}
    while len(chosen) < k:
        draws = np.searchsorted(cdf, rng.uniform(0.0, cdf[-1], size=2 * (k - len(chosen)) + 4),
                                side="right")
        for r in draws.tolist():
            if r not in chosen:
                chosen[r] = None
                if len(chosen) == k:
                    break
    return np.fromiter(chosen, dtype=np.int64, count=k)


def item_name(rank: int) -> str:
    return f"w{rank:06d}"


def synth_zipf_corpus(n_users: int, vocab_size: int, zipf_exponent: float = 1.0,
                      set_size=LognormalSetSize(), seed: int = 0) -> Database:
    """Users holding item sets drawn from a Zipf-weighted vocabulary.

    Item of rank r is picked with probability proportional to r^-exponent.
    Each user draws a set size from ``set_size`` (clipped to [1, vocab_size])
    and samples that many distinct items. User j uses its own random stream
    keyed by (seed, j).
    """
    if vocab_size < 1:
        raise ValueError("vocab_size must be at least 1")
    ranks = np.arange(1, vocab_size + 1, dtype=float)
    cdf = np.cumsum(ranks ** -float(zipf_exponent))
    names = [item_name(r) for r in range(1, vocab_size + 1)]
    width = max(6, len(str(n_users)))
    users = []
    for j in range(n_users):
        rng = np.random.default_rng([seed, j])
        k = set_size.draw(rng, vocab_size)
        picked = _sample_distinct(rng, cdf, k)
        users.append(UserRecord(f"user{j:0{width}d}", frozenset(names[i] for i in picked)))
    return Database(tuple(users))


# -- statistics ---------------------------------------------------------------

@dataclass
class CorpusStats:
    n_users: int
    n_items: int
    rank_frequency: list = field(default_factory=list)
    set_size_percentiles: dict = field(default_factory=dict)
    zipf_exponent_fit: float | None = None

    def to_dict(self) -> dict:
        return {
            "n_users": self.n_users,
            "n_items": self.n_items,
            "zipf_exponent_fit": self.zipf_exponent_fit,
            "set_size_percentiles": {str(k): v for k, v in self.set_size_percentiles.items()},
            "rank_frequency": [list(x) for x in self.rank_frequency],
        }


def item_user_counts(db: Database) -> Counter:
    counts = Counter()
    for user in db.users:
        counts.update(user.items)
    return counts


def fit_zipf_exponent(user_counts) -> float | None:
    """Negated least-squares slope of log(count) on log(rank), counts >= 2 only."""
    counts = np.sort(np.asarray([c for c in user_counts if c >= 2], dtype=float))[::-1]
    if len(counts) < 2:
        return None
    x = np.log(np.arange(1, len(counts) + 1, dtype=float))
    y = np.log(counts)
    slope = np.polyfit(x, y, 1)[0]
    return float(-slope)


def corpus_stats(db: Database, thresholds=DEFAULT_THRESHOLDS) -> CorpusStats:
    counts = item_user_counts(db)
    # Rank by descending count; equal counts ordered by item.
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    sizes = np.array([len(u.items) for u in db.users])
    n = len(sizes)
    pct = {int(t): (float(np.count_nonzero(sizes <= t)) / n if n else 0.0)
           for t in sorted(set(thresholds))}
    return CorpusStats(
        n_users=n,
        n_items=len(counts),
        rank_frequency=[(r, c) for r, (_, c) in enumerate(ranked, 1)],
        set_size_percentiles=pct,
        zipf_exponent_fit=fit_zipf_exponent(counts.values()),
    )


def k_anonymity_baseline(db: Database, k: int, released):
    """(|S_k|, |released| / |S_k|) where S_k is the set of items held by >= k users.

    Coverage is None when S_k is empty; it may exceed 1.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    size = sum(1 for c in item_user_counts(db).values() if c >= k)
    coverage = len(released) / size if size else None
    return size, coverage
