import pytest

from adex.textstats import (EmptyTextError, count_sentences, gunning_fog,
                            is_complex_word, syllable_count, tokenize,
                            type_token_ratio, word_count)

# Reference utterance with published measure values (WC 26, TTR 17/26).
REFERENCE_UTTERANCE = (
    "ja ich dachte vorher okay ich dachte vorher vorher hab ich's nicht "
    "verstanden. Weil ich dachte es gäb nur lange Steine und dann kurze "
    "und dann."
)


def test_word_count_reference():
    assert word_count(REFERENCE_UTTERANCE) == 26


def test_type_token_ratio_reference():
    assert type_token_ratio(REFERENCE_UTTERANCE) == pytest.approx(17 / 26)
    assert round(type_token_ratio(REFERENCE_UTTERANCE), 4) == 0.6538


def test_reference_sentences_and_complex_words():
    assert count_sentences(REFERENCE_UTTERANCE) == 2
    tokens = tokenize(REFERENCE_UTTERANCE)
    complex_words = [t for t in tokens if is_complex_word(t)]
    assert complex_words == ["verstanden"]


def test_gunning_fog_formula_values():
    # one sentence, four words, one complex word
    assert gunning_fog("The encyclopedia is heavy") == pytest.approx(
        0.4 * (4 / 1 + 100 * 1 / 4))
    # two sentences, six words, none complex
    assert gunning_fog("Dogs bark. Cats just nap here.") == pytest.approx(
        0.4 * (6 / 2))
    # reference utterance under the stated formula: 26 words, 2 sentences,
    # 1 complex word
    assert gunning_fog(REFERENCE_UTTERANCE) == pytest.approx(
        0.4 * (26 / 2 + 100 * 1 / 26))


def test_contraction_is_one_token():
    assert tokenize("ich's war gut") == ["ich's", "war", "gut"]


def test_empty_text_raises():
    with pytest.raises(EmptyTextError):
        word_count("   ")
    with pytest.raises(EmptyTextError):
        type_token_ratio("...")


def test_syllable_heuristic():
    assert syllable_count("Quarto") == 2
    assert syllable_count("verstanden") == 3
    assert syllable_count("Steine") == 2  # 'ei' is one vowel group
    assert syllable_count("gut") == 1
    # suffix endings do not add complexity
    assert syllable_count("dreaming") == 1
    assert not is_complex_word("okay")
