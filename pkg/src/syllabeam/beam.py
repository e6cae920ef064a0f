"""Fused beam search over a melody-conditioned generator and a character LM.

Step 0 ranks first syllables by generator probability alone. From step 1 on,
each surviving hypothesis proposes its top generator candidates; every
candidate is scored by the LM against the hypothesis's rendered text (both
spacing variants, best one kept), and the per-step fused value

    lambda_gen * generator_prob + lambda_lm * lm_score

is added to the parent's cumulative score. Hypotheses that emitted the end
token are frozen and compete on their frozen cumulative score. Selection
keeps the best `beam_size` by cumulative score; ties resolve by parent
index, then candidate vocabulary id, so decoding is fully deterministic.

The LM's chosen spacing variant becomes the new token's word boundary and
extends the rendered text, which is the LM context for the next step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

from .corpus import EOS_TEXT, LyricSequence, MelodySequence, SyllableToken
from .lm import SPACED, UNSPACED

AUDIT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class FusionConfig:
    beam_size: int = 5
    lambda_lm: float = 0.75
    lambda_gen: float = 0.25
    max_len: int = 20

    def __post_init__(self) -> None:
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")
        if self.lambda_lm < 0 or self.lambda_gen < 0:
            raise ValueError("fusion weights must be non-negative")
        if not math.isclose(self.lambda_lm + self.lambda_gen, 1.0, abs_tol=1e-12):
            raise ValueError(
                f"fusion weights must sum to 1, got {self.lambda_lm + self.lambda_gen!r}"
            )


@dataclass(frozen=True)
class TraceStep:
    """One decoding step: raw scorer values, spacing choice, fused contribution."""

    generator_prob: float
    lm_score: Optional[float]
    variant: str
    contribution: float


@dataclass(frozen=True)
class Beam:
    """One partial hypothesis; rendered text always reflects the chosen variants."""

    tokens: tuple[SyllableToken, ...]
    rendered: str
    cumulative: float
    finished: bool
    trace: tuple[TraceStep, ...]


class DecodeResult(NamedTuple):
    lyric: LyricSequence
    cumulative: float
    trace: tuple[TraceStep, ...]


def _ranked_candidates(generator, distribution: dict[str, float]) -> list[tuple[str, float]]:
    vocab = generator.vocab
    return sorted(distribution.items(), key=lambda item: (-item[1], vocab.id_of(item[0])))


def _initial_beams(generator, melody: MelodySequence, width: int) -> list[Beam]:
    ranked = _ranked_candidates(generator, generator.next_distribution([], melody.notes[0]))
    beams = []
    for text, prob in ranked[:width]:
        step = TraceStep(prob, None, UNSPACED if text == EOS_TEXT else SPACED, prob)
        if text == EOS_TEXT:
            token = SyllableToken(EOS_TEXT, False)
            beams.append(Beam((token,), "", prob, True, (step,)))
        else:
            token = SyllableToken(text, True)
            beams.append(Beam((token,), text, prob, False, (step,)))
    return beams


def first_step(generator, melody: MelodySequence, config: FusionConfig) -> list[Beam]:
    """The `beam_size` most probable first syllables, generator-only scored.

    The first syllable always starts a word. Ties break by vocabulary id.
    """
    available = len(generator.next_distribution([], melody.notes[0]))
    if config.beam_size > available:
        raise ValueError(f"beam_size {config.beam_size} exceeds {available} candidates")
    return _initial_beams(generator, melody, config.beam_size)


def _expand_one(beam: Beam, text: str, prob: float, lm, config: FusionConfig) -> Beam:
    if text == EOS_TEXT:
        if lm is not None:
            lm_score = lm.score_with_spacing(beam.rendered, EOS_TEXT).value
        else:
            lm_score = 0.0
        contribution = config.lambda_gen * prob + config.lambda_lm * lm_score
        step = TraceStep(prob, lm_score, UNSPACED, contribution)
        return Beam(
            beam.tokens + (SyllableToken(EOS_TEXT, False),),
            beam.rendered,
            beam.cumulative + contribution,
            True,
            beam.trace + (step,),
        )
    if lm is not None:
        scored = lm.score_with_spacing(beam.rendered, text)
        lm_score, variant = scored.value, scored.chosen_variant
    else:
        lm_score, variant = 0.0, SPACED
    contribution = config.lambda_gen * prob + config.lambda_lm * lm_score
    step = TraceStep(prob, lm_score, variant, contribution)
    spaced = variant == SPACED
    rendered = beam.rendered + ((" " + text) if spaced else text)
    return Beam(
        beam.tokens + (SyllableToken(text, spaced),),
        rendered,
        beam.cumulative + contribution,
        False,
        beam.trace + (step,),
    )


def expand_step(
    beams: Sequence[Beam],
    generator,
    lm,
    melody: MelodySequence,
    t: int,
    config: FusionConfig,
) -> list[Beam]:
    """One fused search step: propose, score, and keep the best `beam_size`.

    Finished hypotheses pass through unchanged. Past the final note only the
    end token may be proposed. Requires t >= 1 and at least one unfinished
    hypothesis.
    """
    if t < 1:
        raise ValueError("expand_step applies from step 1 onward")
    if all(beam.finished for beam in beams):
        raise ValueError("no unfinished hypothesis to expand")
    note = melody.notes[t] if t < len(melody.notes) else None
    vocab = generator.vocab

    # pool entries: (beam, parent index, candidate id; -1 keeps a frozen
    # hypothesis ahead of same-score expansions of the same parent)
    pool: list[tuple[Beam, int, int]] = []
    for parent, beam in enumerate(beams):
        if beam.finished:
            pool.append((beam, parent, -1))
            continue
        distribution = generator.next_distribution(beam.tokens, note)
        if note is None:
            candidates = [(EOS_TEXT, distribution[EOS_TEXT])]
        else:
            candidates = _ranked_candidates(generator, distribution)[: config.beam_size]
        for text, prob in candidates:
            pool.append((_expand_one(beam, text, prob, lm, config), parent, vocab.id_of(text)))

    pool.sort(key=lambda entry: (-entry[0].cumulative, entry[1], entry[2]))
    return [entry[0] for entry in pool[: config.beam_size]]


def decode(
    melody: MelodySequence,
    generator,
    lm,
    config: FusionConfig,
) -> list[DecodeResult]:
    """Full fused beam search over a melody.

    Expands until every hypothesis has ended or max_len steps have run;
    a hypothesis still open at the cutoff is closed with an unscored end
    token. Steps past the final note propose only the end token, so no
    output ever has more syllables than the melody has notes. When
    beam_size exceeds the candidate count the first step starts with every
    candidate and the beam set grows through expansion. Requires an LM
    unless lambda_lm is 0.
    """
    if lm is None and config.lambda_lm != 0:
        raise ValueError("an LM is required when lambda_lm > 0")
    available = len(generator.next_distribution([], melody.notes[0]))
    beams = _initial_beams(generator, melody, min(config.beam_size, available))

    for t in range(1, config.max_len):
        if all(beam.finished for beam in beams):
            break
        beams = expand_step(beams, generator, lm, melody, t, config)

    closed = []
    for beam in beams:
        if beam.finished:
            closed.append(beam)
        else:
            closed.append(
                Beam(
                    beam.tokens + (SyllableToken(EOS_TEXT, False),),
                    beam.rendered,
                    beam.cumulative,
                    True,
                    beam.trace,
                )
            )
    ranked = sorted(enumerate(closed), key=lambda item: (-item[1].cumulative, item[0]))
    return [
        DecodeResult(LyricSequence(beam.tokens), beam.cumulative, beam.trace)
        for _, beam in ranked
    ]


def audit_trace(results: Sequence[DecodeResult]) -> bool:
    """Recompute every cumulative score from its trace contributions."""
    for result in results:
        total = sum(step.contribution for step in result.trace)
        if abs(total - result.cumulative) > AUDIT_TOLERANCE:
            return False
    return True
