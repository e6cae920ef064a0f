"""Character-level n-gram language model used as the continuation scorer.

Scores score(context, candidate) in [0, 1] as the geometric mean of
per-character conditional probabilities, and resolves whether a candidate
syllable should attach to the previous word or start a new one by scoring
both spacing variants. It fills the same contract a fine-tuned neural
next-sentence scorer would, behind a deterministic, trainable-in-seconds
model.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .corpus import EOS_TEXT

EOS_CHAR = "$"
DEFAULT_ALPHABET = "abcdefghijklmnopqrstuvwxyz' " + EOS_CHAR
BACKOFF_FACTOR = 0.4

SPACED = "spaced"
UNSPACED = "unspaced"

_FORMAT = "syllabeam-charlm"
_VERSION = 1


def encode_text(text: str, alphabet: str = DEFAULT_ALPHABET) -> str:
    """Map the literal end marker to its reserved character and validate.

    Raises ValueError naming the first out-of-alphabet character position.
    """
    encoded = text.replace(EOS_TEXT, EOS_CHAR)
    allowed = set(alphabet)
    for pos, ch in enumerate(encoded):
        if ch not in allowed:
            raise ValueError(f"character {ch!r} at position {pos} not in alphabet")
    return encoded


@dataclass(frozen=True)
class ContinuationScore:
    value: float
    chosen_variant: str

    def __post_init__(self) -> None:
        if not (math.isfinite(self.value) and 0.0 <= self.value <= 1.0):
            raise ValueError(f"score out of range: {self.value!r}")
        if self.chosen_variant not in (SPACED, UNSPACED):
            raise ValueError(f"unknown variant: {self.chosen_variant!r}")


class CharNgramModel:
    """Add-k smoothed character n-gram model with context backoff.

    Count tables are kept for every context length 0..order-1. A query uses
    the longest context suffix seen in training; each fallback to a shorter
    suffix multiplies the per-character probability by BACKOFF_FACTOR
    (so backed-off scores are discounted, while conditional_distribution
    always reports the proper add-k distribution of the resolved level).
    """

    def __init__(self, order: int, k: float, alphabet: str = DEFAULT_ALPHABET):
        if order < 1:
            raise ValueError("order must be >= 1")
        if k < 0:
            raise ValueError("smoothing k must be >= 0")
        if len(set(alphabet)) != len(alphabet):
            raise ValueError("alphabet contains duplicates")
        self.order = order
        self.k = k
        self.alphabet = alphabet
        # tables[L][context_of_length_L][next_char] -> count
        self._tables: list[dict[str, dict[str, int]]] = [{} for _ in range(order)]

    # -- training ---------------------------------------------------------

    def add_text(self, text: str) -> None:
        for pos in range(len(text)):
            ch = text[pos]
            if ch not in self.alphabet:
                raise ValueError(f"character {ch!r} at position {pos} not in alphabet")
            for length in range(self.order):
                if pos - length < 0:
                    break
                context = text[pos - length : pos]
                table = self._tables[length].setdefault(context, {})
                table[ch] = table.get(ch, 0) + 1

    # -- probabilities ----------------------------------------------------

    def _resolve(self, context: str) -> tuple[dict[str, int], int]:
        """Longest stored suffix of `context`: its count table and hop count."""
        suffix = context[-(self.order - 1) :] if self.order > 1 else ""
        hops = 0
        for length in range(len(suffix), -1, -1):
            sub = suffix[len(suffix) - length :]
            table = self._tables[length].get(sub)
            if table is not None:
                return table, hops
            hops += 1
        return {}, hops

    def char_prob(self, ch: str, context: str) -> float:
        """P(ch | context), discounted by BACKOFF_FACTOR per fallback hop."""
        if ch not in self.alphabet:
            raise ValueError(f"character {ch!r} not in alphabet")
        table, hops = self._resolve(context)
        size = len(self.alphabet)
        if not table:
            return (BACKOFF_FACTOR ** hops) / size
        total = sum(table.values())
        p = (table.get(ch, 0) + self.k) / (total + self.k * size)
        return (BACKOFF_FACTOR ** hops) * p

    def conditional_distribution(self, context: str) -> dict[str, float]:
        """Proper add-k distribution over the alphabet at the resolved level."""
        table, _ = self._resolve(context)
        size = len(self.alphabet)
        if not table:
            return {ch: 1.0 / size for ch in self.alphabet}
        total = sum(table.values())
        denom = total + self.k * size
        return {ch: (table.get(ch, 0) + self.k) / denom for ch in self.alphabet}

    # -- scoring ----------------------------------------------------------

    def score_continuation(self, context: str, candidate: str) -> float:
        """Geometric mean of per-character probabilities of `candidate`
        following `context`, the context growing through the candidate."""
        if not candidate:
            raise ValueError("candidate must be non-empty")
        for pos, ch in enumerate(context):
            if ch not in self.alphabet:
                raise ValueError(f"character {ch!r} at position {pos} not in alphabet")
        running = context
        log_sum = 0.0
        for ch in candidate:
            p = self.char_prob(ch, running)
            if p == 0.0:
                return 0.0
            log_sum += math.log(p)
            running += ch
        return math.exp(log_sum / len(candidate))

    def score_with_spacing(self, context: str, syllable_text: str) -> ContinuationScore:
        """Score both renderings of a syllable and keep the better one.

        The end marker has a single rendering (the reserved character).
        Ties break to the unspaced variant.
        """
        if not syllable_text:
            raise ValueError("syllable must be non-empty")
        if syllable_text == EOS_TEXT:
            if not context:
                raise ValueError("end marker needs a non-empty context")
            return ContinuationScore(self.score_continuation(context, EOS_CHAR), UNSPACED)
        unspaced = self.score_continuation(context, syllable_text)
        spaced = self.score_continuation(context, " " + syllable_text)
        if unspaced >= spaced:
            return ContinuationScore(unspaced, UNSPACED)
        return ContinuationScore(spaced, SPACED)

    def nsp_score(self, context: str, candidate: str) -> float:
        """Score a dataset-notation candidate against a dataset-notation context.

        Candidates use the underscore marker for a leading space and the
        literal end marker for end-of-sequence; contexts may embed the end
        marker mid-string (corruption rows).
        """
        encoded_context = encode_text(context, self.alphabet)
        if candidate.startswith("_"):
            body = candidate[1:]
            encoded = " " + (EOS_CHAR if body == EOS_TEXT else encode_text(body, self.alphabet))
        elif candidate == EOS_TEXT:
            encoded = EOS_CHAR
        else:
            encoded = encode_text(candidate, self.alphabet)
        return self.score_continuation(encoded_context, encoded)

    # -- persistence ------------------------------------------------------

    def save(self, path) -> None:
        payload = {
            "format": _FORMAT,
            "version": _VERSION,
            "order": self.order,
            "k": self.k,
            "alphabet": self.alphabet,
            "tables": [
                {ctx: dict(sorted(counts.items())) for ctx, counts in sorted(level.items())}
                for level in self._tables
            ],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "CharNgramModel":
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("format") != _FORMAT:
            raise ValueError(f"not a {_FORMAT} file: {path}")
        if payload.get("version") != _VERSION:
            raise ValueError(f"unsupported version {payload.get('version')}")
        model = cls(payload["order"], payload["k"], payload["alphabet"])
        model._tables = [
            {ctx: {ch: int(n) for ch, n in counts.items()} for ctx, counts in level.items()}
            for level in payload["tables"]
        ]
        return model

    def stats(self) -> dict:
        return {
            "order": self.order,
            "k": self.k,
            "alphabet_size": len(self.alphabet),
            "contexts": sum(len(level) for level in self._tables),
        }


def train_char_ngram(
    texts: Sequence[str], order: int, k: float, alphabet: str = DEFAULT_ALPHABET
) -> CharNgramModel:
    """Count n-grams of every text into a fresh model."""
    if not texts:
        raise ValueError("empty training corpus")
    model = CharNgramModel(order, k, alphabet)
    for text in texts:
        model.add_text(text)
    return model


def nsp_accuracy(
    scorer: Callable[[str, str], float],
    dataset: Iterable,
    threshold: float = 0.5,
) -> dict[str, float]:
    """Thresholded accuracy and rank AUC of a continuation scorer.

    `scorer` maps (context, candidate) to a score; an example is counted
    correct when (score >= threshold) agrees with its label. AUC is the
    Mann-Whitney rank statistic with midranks for ties; it is NaN when the
    dataset contains a single class.
    """
    scored: list[tuple[float, int]] = []
    for example in dataset:
        scored.append((scorer(example.context, example.candidate), example.label))
    if not scored:
        raise ValueError("empty dataset")

    correct = sum(1 for s, label in scored if (s >= threshold) == (label == 1))
    accuracy = correct / len(scored)

    n_pos = sum(1 for _, label in scored if label == 1)
    n_neg = len(scored) - n_pos
    if n_pos == 0 or n_neg == 0:
        return {"accuracy": accuracy, "auc": float("nan")}

    ordered = sorted(scored, key=lambda item: item[0])
    rank_sum_pos = 0.0
    i = 0
    while i < len(ordered):
        j = i
        while j < len(ordered) and ordered[j][0] == ordered[i][0]:
            j += 1
        midrank = (i + 1 + j) / 2.0
        rank_sum_pos += midrank * sum(1 for _, label in ordered[i:j] if label == 1)
        i = j
    auc = (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
    return {"accuracy": accuracy, "auc": auc}


def lyric_lm_text(rendered: str) -> str:
    """Training-text form of a rendered lyric: the text plus the end character."""
    return encode_text(rendered) + EOS_CHAR
