"""Shared synthetic-corpus builders for the test suite."""

from __future__ import annotations

import random

from syllabeam.corpus import (
    AlignedPair,
    LyricSequence,
    MelodyNote,
    MelodySequence,
    SyllableToken,
)

# small word inventory, each word pre-split into syllables
WORDS = [
    ("love",),
    ("night",),
    ("sun",),
    ("sky",),
    ("dream",),
    ("heart",),
    ("gold",),
    ("rain",),
    ("ba", "by"),
    ("shi", "ning"),
    ("mo", "ment"),
    ("fly", "ing"),
    ("o", "ver"),
    ("to", "ge", "ther"),
    ("for", "e", "ver"),
    ("me", "lo", "dy"),
]

PITCHES = list(range(55, 72))
DURATIONS = [0.5, 1.0, 2.0]
RESTS = [0.0, 0.0, 0.5]


def make_lyric(rnd: random.Random, n_syllables: int) -> LyricSequence:
    tokens: list[SyllableToken] = []
    while len(tokens) < n_syllables:
        room = n_syllables - len(tokens)
        word = rnd.choice([w for w in WORDS if len(w) <= room])
        tokens.append(SyllableToken(word[0], True))
        tokens.extend(SyllableToken(s, False) for s in word[1:])
    return LyricSequence(tuple(tokens))


def make_melody(rnd: random.Random, n_notes: int) -> MelodySequence:
    notes = tuple(
        MelodyNote(rnd.choice(PITCHES), rnd.choice(DURATIONS), rnd.choice(RESTS))
        for _ in range(n_notes)
    )
    return MelodySequence(notes)


def make_pair(rnd: random.Random, n_syllables: int) -> AlignedPair:
    lyric = make_lyric(rnd, n_syllables)
    return AlignedPair(make_melody(rnd, len(lyric.syllables())), lyric)


def make_corpus(
    n_pairs: int, seed: int, min_syllables: int = 6, max_syllables: int = 20
) -> list[AlignedPair]:
    rnd = random.Random(seed)
    return [
        make_pair(rnd, rnd.randint(min_syllables, max_syllables)) for _ in range(n_pairs)
    ]
