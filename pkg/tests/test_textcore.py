import pytest
from hypothesis import given, strategies as st

from tampers.errors import EmptyTextError, InvalidSubstitutionError
from tampers.textcore import (
    Pos,
    default_stopwords,
    load_pos_lexicon,
    pos_tag,
    render,
    tokenize,
)

MR_SENTENCE = (
    "A good film with a solid pedigree both in front of and, "
    "more specifically, behind the camera."
)


def surfaces(text):
    return [t.surface for t in text.tokens]


class TestTokenize:
    def test_punctuation_split(self):
        assert surfaces(tokenize("A good film.")) == ["A", "good", "film", "."]

    def test_internal_apostrophe_kept(self):
        assert surfaces(tokenize("don't")) == ["don't"]

    def test_leading_punctuation(self):
        assert surfaces(tokenize('("yes")')) == ["(", '"', "yes", '"', ")"]

    def test_word_count_excludes_punctuation(self):
        text = tokenize(MR_SENTENCE)
        assert text.num_words == 17

    def test_empty_raises(self):
        with pytest.raises(EmptyTextError):
            tokenize("   ")

    def test_normal_is_lowercased(self):
        text = tokenize("Good FILM")
        assert [t.normal for t in text.tokens] == ["good", "film"]


class TestPosTag:
    lexicon = {"film": Pos.NOUN, "good": Pos.ADJ, "the": Pos.OTHER}
    stop = frozenset({"the", "a"})

    def test_lookup(self):
        text = pos_tag(tokenize("good film"), self.lexicon, self.stop)
        assert text.tokens[0].pos == Pos.ADJ
        assert text.tokens[1].pos == Pos.NOUN
        assert all(t.is_content for t in text.tokens)

    def test_stopword_never_content(self):
        lexicon = {"the": Pos.NOUN}
        text = pos_tag(tokenize("the"), lexicon, self.stop)
        assert not text.tokens[0].is_content

    def test_unknown_word_is_other(self):
        text = pos_tag(tokenize("zzqx"), self.lexicon, self.stop)
        assert text.tokens[0].pos == Pos.OTHER
        assert not text.tokens[0].is_content

    def test_punctuation_is_other(self):
        text = pos_tag(tokenize("good ."), self.lexicon, self.stop)
        assert text.tokens[1].pos == Pos.OTHER


class TestRender:
    def tagged(self, raw):
        lexicon = {
            "good": Pos.ADJ, "film": Pos.NOUN, "solid": Pos.ADJ,
            "pedigree": Pos.NOUN, "camera": Pos.NOUN, "front": Pos.NOUN,
        }
        return pos_tag(tokenize(raw), lexicon, default_stopwords())

    def test_identity(self):
        text = self.tagged(MR_SENTENCE)
        assert render(text) == MR_SENTENCE

    def test_single_substitution(self):
        text = self.tagged(MR_SENTENCE)
        out = render(text, {1: "harmless"})
        assert out == MR_SENTENCE.replace("good", "harmless")

    def test_capitalization_inherited(self):
        text = self.tagged("Good film")
        assert render(text, {0: "harmless"}) == "Harmless film"

    def test_non_content_position_rejected(self):
        text = self.tagged(MR_SENTENCE)
        with pytest.raises(InvalidSubstitutionError):
            render(text, {0: "harmless"})  # "A" is a stopword

    def test_substitution_locality(self):
        text = self.tagged(MR_SENTENCE)
        base = render(text).split()
        out = render(text, {1: "harmless", 5: "weak"}).split()
        assert sum(a != b for a, b in zip(base, out)) == 2


word = st.text(alphabet=st.characters(whitelist_categories=("Ll",)), min_size=1, max_size=8)
punct = st.sampled_from([".", ",", "!", "?", "(", ")", '"'])


@given(st.lists(st.tuples(punct | st.just(""), word, punct | st.just("")),
                min_size=1, max_size=12))
def test_round_trip(chunks):
    raw = " ".join(f"{a}{w}{b}" for a, w, b in chunks)
    text = tokenize(raw)
    rendered = render(text)
    assert rendered == raw
    assert [t.surface for t in tokenize(rendered).tokens] == [
        t.surface for t in text.tokens
    ]


def test_default_stopwords_loaded():
    stop = default_stopwords()
    assert "the" in stop and len(stop) > 100


def test_load_pos_lexicon(tmp_path):
    path = tmp_path / "pos.tsv"
    path.write_text("film\tNOUN\ngood\tADJ\nfilm\tVERB\nbroken line\n")
    table = load_pos_lexicon(path)
    assert table["film"] == Pos.NOUN  # first row wins
    assert table["good"] == Pos.ADJ
    assert "broken line" not in table
