"""Construction of the next-syllable-prediction fine-tuning dataset.

Every lyric position (each syllable after the first, plus the final
end-of-sequence prediction) yields one positive row and a configurable set
of negative rows:

  * random candidate: another syllable of the same lyric, its spacing
    marker preserved from where it originally occurred;
  * wrong spacing: the true candidate with its word-boundary marker
    flipped, always for the first few positions and with a fixed
    probability afterwards;
  * corrupted context: one context syllable swapped for another syllable
    of the same lyric (end marker included), glued to the previous word or
    preceded by a space at a coin flip, with the true candidate.

Rows are (context, candidate, label) where a candidate's leading
underscore marks a preceding space. Output is deterministic for a given
seed: each lyric draws from its own substream keyed by (seed, lyric index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .corpus import EOS_TEXT, LyricSequence, SyllableToken, render_text
from .rng import SplitMix64, substream


@dataclass(frozen=True)
class NspExample:
    context: str
    candidate: str
    label: int

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")


@dataclass(frozen=True)
class BuilderConfig:
    spacing_negative_rate: float = 0.6
    always_spacing_first_k: int = 3
    context_swap_rate: float = 0.4
    swap_space_rate: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("spacing_negative_rate", "context_swap_rate", "swap_space_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value!r}")
        if self.always_spacing_first_k < 0:
            raise ValueError("always_spacing_first_k must be >= 0")


def candidate_marker(text: str, spaced: bool) -> str:
    """Dataset notation for a candidate: leading underscore means a space."""
    return ("_" + text) if spaced else text


def corrupted_context(
    syllables: Sequence[SyllableToken], slot: int, replacement: str, spaced: bool
) -> str:
    """Render a context with one syllable slot replaced.

    The replacement is rendered literally (the end marker included) and
    joined to its neighbours according to `spaced`; all other syllables
    keep their own word boundaries.
    """
    out = []
    for i, tok in enumerate(syllables):
        text = replacement if i == slot else tok.text
        word_initial = spaced if i == slot else tok.word_initial
        if i > 0 and word_initial:
            out.append(" ")
        out.append(text)
    return "".join(out)


def build_examples_for_lyric(
    lyric: LyricSequence, config: BuilderConfig, rng: SplitMix64
) -> list[NspExample]:
    """All dataset rows of one lyric, in position order.

    Position i (1-based) predicts syllable i from the first i syllables;
    the final position predicts the end marker from the whole lyric.
    """
    syllables = lyric.syllables()
    if len(syllables) < 2:
        raise ValueError("lyric must contain at least 2 syllables")

    # (text, spaced) occurrence list the negatives draw from; the end
    # marker is a drawable candidate and corruption symbol too.
    occurrences = [(tok.text, tok.word_initial) for tok in syllables]
    occurrences.append((EOS_TEXT, False))

    examples: list[NspExample] = []
    for i in range(1, len(syllables) + 1):
        context = render_text(LyricSequence(syllables[:i]))
        if i < len(syllables):
            true_text, true_spaced = syllables[i].text, syllables[i].word_initial
        else:
            true_text, true_spaced = EOS_TEXT, False
        true_candidate = candidate_marker(true_text, true_spaced)

        examples.append(NspExample(context, true_candidate, 1))

        pool = [occ for occ in occurrences if occ != (true_text, true_spaced)]
        rand_text, rand_spaced = pool[rng.randrange(len(pool))]
        examples.append(NspExample(context, candidate_marker(rand_text, rand_spaced), 0))

        if i <= config.always_spacing_first_k or rng.bernoulli(config.spacing_negative_rate):
            examples.append(NspExample(context, candidate_marker(true_text, not true_spaced), 0))

        if rng.bernoulli(config.context_swap_rate):
            slot = rng.randrange(i)
            slot_text = syllables[slot].text
            swap_pool = [occ for occ in occurrences if occ[0] != slot_text]
            replacement = swap_pool[rng.randrange(len(swap_pool))][0]
            spaced = rng.bernoulli(config.swap_space_rate)
            corrupted = corrupted_context(syllables[:i], slot, replacement, spaced)
            examples.append(NspExample(corrupted, true_candidate, 0))

    return examples


def build_dataset(
    corpus: Sequence[LyricSequence],
    config: BuilderConfig,
    sink: Callable[[NspExample], None],
) -> dict[str, int]:
    """Stream every lyric's rows to `sink` in lyric order; return counts."""
    if not corpus:
        raise ValueError("empty corpus")
    positives = negatives = 0
    for index, lyric in enumerate(corpus):
        for example in build_examples_for_lyric(lyric, config, substream(config.seed, index)):
            sink(example)
            if example.label == 1:
                positives += 1
            else:
                negatives += 1
    return {"positives": positives, "negatives": negatives, "total": positives + negatives}


def expected_examples_per_position(config: BuilderConfig, position: int) -> float:
    """Expected row count for one position: positive + random negative,
    plus the spacing and corruption rules at their firing rates."""
    p_spacing = 1.0 if position <= config.always_spacing_first_k else config.spacing_negative_rate
    return 2.0 + p_spacing + config.context_swap_rate


def expected_dataset_size(corpus: Sequence[LyricSequence], config: BuilderConfig) -> tuple[float, float]:
    """(mean, standard deviation) of the total row count under `config`."""
    mean = 0.0
    variance = 0.0
    for lyric in corpus:
        for i in range(1, len(lyric.syllables()) + 1):
            mean += expected_examples_per_position(config, i)
            if i > config.always_spacing_first_k:
                p = config.spacing_negative_rate
                variance += p * (1 - p)
            q = config.context_swap_rate
            variance += q * (1 - q)
    return mean, math.sqrt(variance)


def write_nsp_tsv(examples: Iterable[NspExample], path) -> None:
    """Tab-separated context / candidate / label, one row per line."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for ex in examples:
            fh.write(f"{ex.context}\t{ex.candidate}\t{ex.label}\n")


def read_nsp_tsv(path) -> list[NspExample]:
    examples = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: expected 3 columns, got {len(parts)}")
            if parts[2] not in ("0", "1"):
                raise ValueError(f"line {lineno}: bad label {parts[2]!r}")
            examples.append(NspExample(parts[0], parts[1], int(parts[2])))
    return examples
