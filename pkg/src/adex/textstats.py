"""Text complexity measures for verbal contributions.

These are standalone utilities: the typed-input feedback loop relies on
typing telemetry instead, but the measures remain useful for analyzing
transcripts of spoken interaction.
"""

from __future__ import annotations

import re

_TOKEN_SPLIT = re.compile(r"\s+")
_STRIP_EDGES = re.compile(r"^\W+|\W+$", re.UNICODE)
_SENTENCE_END = re.compile(r"[.!?]+")
_VOWEL_GROUP = re.compile(r"[aeiouyäöüáéíóú]+", re.IGNORECASE)
# Common unstressed endings that do not count toward the complex-word rule.
_IGNORED_SUFFIXES = ("es", "ed", "ing")


class EmptyTextError(ValueError):
    pass


def tokenize(text: str) -> list[str]:
    """Whitespace tokens with surrounding punctuation stripped.

    Word-internal apostrophes survive, so a contraction stays one token.
    """
    tokens = []
    for raw in _TOKEN_SPLIT.split(text.strip()):
        word = _STRIP_EDGES.sub("", raw)
        if word:
            tokens.append(word)
    if not tokens:
        raise EmptyTextError("text contains no words")
    return tokens


def _lexeme(token: str) -> str:
    # Clitics such as "ich's" reduce to their host word.
    return token.lower().split("'", 1)[0]


def word_count(text: str) -> int:
    return len(tokenize(text))


def type_token_ratio(text: str) -> float:
    """Distinct lexemes divided by the number of tokens."""
    tokens = tokenize(text)
    return len({_lexeme(t) for t in tokens}) / len(tokens)


def count_sentences(text: str) -> int:
    return max(1, len([s for s in _SENTENCE_END.split(text) if s.strip()]))


def syllable_count(word: str) -> int:
    core = word.lower()
    for suffix in _IGNORED_SUFFIXES:
        if core.endswith(suffix) and len(core) > len(suffix) + 2:
            core = core[: -len(suffix)]
            break
    return max(1, len(_VOWEL_GROUP.findall(core)))


def is_complex_word(word: str) -> bool:
    return syllable_count(word) >= 3


def gunning_fog(text: str) -> float:
    """0.4 * (words per sentence + 100 * share of complex words).

    A word is complex when it has three or more syllables by the
    vowel-group heuristic, ignoring common suffixes.
    """
    tokens = tokenize(text)
    sentences = count_sentences(text)
    complex_words = sum(1 for t in tokens if is_complex_word(t))
    return 0.4 * (len(tokens) / sentences + 100.0 * complex_words / len(tokens))
