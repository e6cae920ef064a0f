"""Melody-conditioned syllable generator.

A count-based model over (syllable history, note bucket) pairs standing in
for a trained sequence decoder: given the recent syllables and the current
note's discretized features it returns a full probability distribution over
the vocabulary, end token included.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

from .corpus import (
    BOS_TEXT,
    EOS_TEXT,
    AlignedPair,
    MelodyNote,
    SyllableToken,
    Vocabulary,
)

DURATION_SHORT = "short"
DURATION_MEDIUM = "medium"
DURATION_LONG = "long"

_FORMAT = "syllabeam-generator"
_VERSION = 1
_BUCKETING_VERSION = 1


@dataclass(frozen=True)
class NoteBucket:
    """Discretized note features for count-based conditioning."""

    pitch_class: int
    register: int
    duration_class: str
    has_rest: bool


def bucket_note(note: MelodyNote) -> NoteBucket:
    if note.duration < 1:
        duration_class = DURATION_SHORT
    elif note.duration == 1:
        duration_class = DURATION_MEDIUM
    else:
        duration_class = DURATION_LONG
    return NoteBucket(note.pitch % 12, note.pitch // 12, duration_class, note.rest > 0)


class MelodyConditionedNgram:
    """Syllable n-gram conditioned on the current note bucket.

    Four count tables back each other off: (history, bucket) -> (history)
    -> (bucket) -> unigram; a query is served by the first table that has
    seen its key, with add-k smoothing over the emittable vocabulary, so
    every returned distribution sums to one. A bucket of None stands for
    "past the final note" and is only ever paired with the end token in
    training data.
    """

    def __init__(self, vocab: Vocabulary, history: int = 2, k: float = 0.1):
        if history < 1:
            raise ValueError("history must be >= 1")
        if k < 0:
            raise ValueError("smoothing k must be >= 0")
        self.vocab = vocab
        self.history = history
        self.k = k
        self._by_hist_bucket: dict[tuple[tuple[str, ...], Optional[NoteBucket]], dict[str, int]] = {}
        self._by_hist: dict[tuple[str, ...], dict[str, int]] = {}
        self._by_bucket: dict[Optional[NoteBucket], dict[str, int]] = {}
        self._unigram: dict[str, int] = {}

    def _history_key(self, history: Sequence[SyllableToken]) -> tuple[str, ...]:
        texts = [tok.text for tok in history]
        padded = [BOS_TEXT] * max(0, self.history - len(texts)) + texts[-self.history :]
        return tuple(padded)

    def _count(self, hist_key: tuple[str, ...], bucket: Optional[NoteBucket], target: str) -> None:
        for table, key in (
            (self._by_hist_bucket, (hist_key, bucket)),
            (self._by_hist, hist_key),
            (self._by_bucket, bucket),
        ):
            slot = table.setdefault(key, {})
            slot[target] = slot.get(target, 0) + 1
        self._unigram[target] = self._unigram.get(target, 0) + 1

    def add_pair(self, pair: AlignedPair) -> None:
        tokens = pair.lyric.syllables()
        for tok in tokens:
            if tok.text not in self.vocab:
                raise ValueError(f"syllable {tok.text!r} not in vocabulary")
        for i, tok in enumerate(tokens):
            hist_key = self._history_key(tokens[:i])
            self._count(hist_key, bucket_note(pair.melody.notes[i]), tok.text)
        self._count(self._history_key(tokens), None, EOS_TEXT)

    def next_distribution(
        self, history: Sequence[SyllableToken], note: Optional[MelodyNote]
    ) -> dict[str, float]:
        """Distribution over every emittable vocabulary entry (BOS excluded)."""
        hist_key = self._history_key(history)
        bucket = bucket_note(note) if note is not None else None
        counts = (
            self._by_hist_bucket.get((hist_key, bucket))
            or self._by_hist.get(hist_key)
            or self._by_bucket.get(bucket)
            or self._unigram
        )
        emittable = self.vocab.emittable()
        total = sum(counts.values())
        denom = total + self.k * len(emittable)
        if denom == 0:
            return {text: 1.0 / len(emittable) for text in emittable}
        return {text: (counts.get(text, 0) + self.k) / denom for text in emittable}

    # -- persistence ------------------------------------------------------

    @staticmethod
    def _bucket_json(bucket: Optional[NoteBucket]):
        if bucket is None:
            return None
        return [bucket.pitch_class, bucket.register, bucket.duration_class, bucket.has_rest]

    @staticmethod
    def _bucket_from_json(data) -> Optional[NoteBucket]:
        if data is None:
            return None
        return NoteBucket(int(data[0]), int(data[1]), data[2], bool(data[3]))

    def save(self, path) -> None:
        def sorted_counts(counts: dict[str, int]) -> dict[str, int]:
            return dict(sorted(counts.items()))

        payload = {
            "format": _FORMAT,
            "version": _VERSION,
            "bucketing": _BUCKETING_VERSION,
            "history": self.history,
            "k": self.k,
            "vocabulary": list(self.vocab.syllable_texts()),
            "hist_bucket": sorted(
                (
                    [list(hist), self._bucket_json(bucket), sorted_counts(counts)]
                    for (hist, bucket), counts in self._by_hist_bucket.items()
                ),
                key=lambda row: json.dumps(row[:2]),
            ),
            "hist": sorted(
                ([list(hist), sorted_counts(counts)] for hist, counts in self._by_hist.items()),
                key=lambda row: json.dumps(row[0]),
            ),
            "bucket": sorted(
                (
                    [self._bucket_json(bucket), sorted_counts(counts)]
                    for bucket, counts in self._by_bucket.items()
                ),
                key=lambda row: json.dumps(row[0]),
            ),
            "unigram": sorted_counts(self._unigram),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "MelodyConditionedNgram":
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("format") != _FORMAT:
            raise ValueError(f"not a {_FORMAT} file: {path}")
        if payload.get("version") != _VERSION:
            raise ValueError(f"unsupported version {payload.get('version')}")
        if payload.get("bucketing") != _BUCKETING_VERSION:
            raise ValueError(f"unsupported bucketing version {payload.get('bucketing')}")
        model = cls(Vocabulary(payload["vocabulary"]), payload["history"], payload["k"])
        for hist, bucket, counts in payload["hist_bucket"]:
            model._by_hist_bucket[(tuple(hist), cls._bucket_from_json(bucket))] = {
                t: int(n) for t, n in counts.items()
            }
        for hist, counts in payload["hist"]:
            model._by_hist[tuple(hist)] = {t: int(n) for t, n in counts.items()}
        for bucket, counts in payload["bucket"]:
            model._by_bucket[cls._bucket_from_json(bucket)] = {
                t: int(n) for t, n in counts.items()
            }
        model._unigram = {t: int(n) for t, n in payload["unigram"].items()}
        return model

    def stats(self) -> dict:
        return {
            "history": self.history,
            "k": self.k,
            "vocabulary_size": len(self.vocab),
            "hist_bucket_contexts": len(self._by_hist_bucket),
        }


def train_generator(
    corpus: Sequence[AlignedPair], vocab: Vocabulary, history: int = 2, k: float = 0.1
) -> MelodyConditionedNgram:
    """Count every (history, note bucket) -> syllable event of the corpus."""
    if not corpus:
        raise ValueError("empty corpus")
    model = MelodyConditionedNgram(vocab, history, k)
    for pair in corpus:
        model.add_pair(pair)
    return model
