import os

import pytest

from cptrie.errors import EmptyWordListError
from cptrie.ingest import (
    IngestConfig,
    IngestCounters,
    RejectReason,
    Rejection,
    SentenceTokens,
    ingest_document,
    iter_documents,
    load_word_list,
    split_sentences,
    tokenize_and_filter,
)


class TestLoadWordList:
    def test_lowercases_and_dedups(self, tmp_path):
        path = tmp_path / "wl.txt"
        path.write_text("the\nfilm\nFilm\n")
        wl = load_word_list(path)
        assert wl.size == 2
        assert "film" in wl and "Film" in wl

    def test_blank_lines_ignored(self, tmp_path):
        path = tmp_path / "wl.txt"
        path.write_text("the\n\n  \nfilm\n")
        assert load_word_list(path).size == 2

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "wl.txt"
        path.write_text("\n\n")
        with pytest.raises(EmptyWordListError):
            load_word_list(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_word_list(tmp_path / "nope.txt")

    @pytest.mark.skipif(
        "CPTRIE_REFERENCE_WORDLIST" not in os.environ,
        reason="reference word list not available at desk scale",
    )
    def test_reference_wordlist_size(self):
        wl = load_word_list(os.environ["CPTRIE_REFERENCE_WORDLIST"])
        assert wl.size == 354986


class TestSplitSentences:
    def test_two_terminals(self):
        assert split_sentences("A b. C d!") == ["A b.", "C d!"]

    def test_heading_line_dropped(self):
        assert split_sentences("Early life") == []

    def test_heading_between_sentences(self):
        doc = "The film was long.\nEarly life\nThe film was new."
        assert split_sentences(doc) == ["The film was long.", "The film was new."]

    def test_abbreviation_not_a_boundary(self):
        assert split_sentences("Dr. Smith ran.") == ["Dr. Smith ran."]

    def test_multiple_terminals_attached(self):
        assert split_sentences("What is this?! He left.") == ["What is this?!", "He left."]

    def test_wrapped_sentence_joined_across_lines(self):
        doc = "The film had a quiet start and a very\nlong ending."
        assert split_sentences(doc) == [
            "The film had a quiet start and a very long ending."
        ]

    def test_blank_line_is_a_paragraph_break(self):
        # The unterminated first paragraph is long enough to dodge the
        # heading rule but never reaches a terminal, so it is dropped.
        doc = "nine words here without any terminal punctuation at all\n\nNext one."
        assert split_sentences(doc) == ["Next one."]

    def test_empty_document(self):
        assert split_sentences("") == []

    def test_heading_max_units_config(self):
        doc = "Early life then some\nmore text follows here."
        assert split_sentences(doc) == ["more text follows here."]
        config = IngestConfig(heading_max_units=2)
        assert split_sentences(doc, config) == [
            "Early life then some more text follows here."
        ]


class TestTokenizeAndFilter:
    WL_WORDS = {"the", "film", "was", "shot", "well", "known", "ran", "dr", "smith"}

    @pytest.fixture
    def wl(self, tmp_path):
        path = tmp_path / "wl.txt"
        path.write_text("\n".join(self.WL_WORDS))
        return load_word_list(path)

    def test_basic_units(self, wl):
        out = tokenize_and_filter("The film was shot.", wl)
        assert isinstance(out, SentenceTokens)
        assert out.words == ("The", "film", "was", "shot", ".")

    def test_case_preserved_filter_insensitive(self, wl):
        out = tokenize_and_filter("THE FILM WAS SHOT.", wl)
        assert out.words[0] == "THE"

    def test_unknown_word_rejected(self, wl):
        out = tokenize_and_filter("Zyxzyq ran.", wl)
        assert out == Rejection(RejectReason.UNKNOWN_WORD, "Zyxzyq")

    def test_digit_rejected(self, wl):
        out = tokenize_and_filter("The film was shot in 1999.", wl)
        assert out == Rejection(RejectReason.DIGIT, "1")

    def test_digit_takes_precedence_over_unknown(self, wl):
        out = tokenize_and_filter("Zyxzyq ran 4 miles.", wl)
        assert out.reason is RejectReason.DIGIT

    def test_hyphen_splits_words(self, wl):
        out = tokenize_and_filter("The film was well-known.", wl)
        assert out.words == ("The", "film", "was", "well", "-", "known", ".")

    def test_punctuation_single_units(self, wl):
        out = tokenize_and_filter("The film, was shot.", wl)
        assert out.words == ("The", "film", ",", "was", "shot", ".")

    def test_no_unit_contains_whitespace(self, wl):
        out = tokenize_and_filter("The  film\twas shot .", wl)
        assert all(not any(c.isspace() for c in u) for u in out.words)


class TestFixtureCorpus:
    def test_partition_counts(self, fixture_corpus, fixture_wordlist, expected):
        wl = load_word_list(fixture_wordlist)
        counters = IngestCounters()
        for source_id, text in iter_documents(fixture_corpus):
            _, c = ingest_document(text, wl, source_id=source_id)
            counters.add(c)
        assert counters.accepted == expected["accepted"]
        assert counters.unknown_word == expected["unknown_word"]
        assert counters.digit == expected["digit"]
        assert counters.heading == expected["heading"]
        assert counters.total == expected["candidates"] + expected["heading"]

    def test_wordlist_size(self, fixture_wordlist, expected):
        assert load_word_list(fixture_wordlist).size == expected["wordlist_size"]

    def test_deterministic(self, fixture_corpus, fixture_wordlist):
        wl = load_word_list(fixture_wordlist)
        runs = []
        for _ in range(2):
            stream = []
            for source_id, text in iter_documents(fixture_corpus):
                sentences, _ = ingest_document(text, wl, source_id=source_id)
                stream.extend(sentences)
            runs.append(stream)
        assert runs[0] == runs[1]

    def test_every_unit_is_word_or_single_punct(self, fixture_corpus, fixture_wordlist):
        wl = load_word_list(fixture_wordlist)
        for source_id, text in iter_documents(fixture_corpus):
            sentences, _ = ingest_document(text, wl, source_id=source_id)
            for sent in sentences:
                assert sent.words
                for u in sent.words:
                    assert (u.isalpha() and u in wl) or (len(u) == 1 and not u.isalpha())


class TestIngestConfig:
    def test_from_file(self, tmp_path):
        abbr = tmp_path / "abbr.txt"
        abbr.write_text("Dr.\nMr.\n")
        cfg_file = tmp_path / "ingest.cfg"
        cfg_file.write_text(
            "# ingest settings\nabbreviations = {}\nheading-max-units = 4\n".format(abbr)
        )
        config = IngestConfig.from_file(cfg_file)
        assert config.heading_max_units == 4
        assert config.abbreviations == frozenset({"dr.", "mr."})


class TestIterDocuments:
    def test_docs_per_line(self, tmp_path):
        path = tmp_path / "docs.txt"
        path.write_text("First doc here.\n\nSecond doc here.\n")
        docs = list(iter_documents(path, docs_per_line=True))
        assert [d[0] for d in docs] == ["docs.txt:1", "docs.txt:3"]

    def test_directory_sorted(self, fixture_corpus):
        names = [name for name, _ in iter_documents(fixture_corpus)]
        assert names == sorted(names)
        assert len(names) == 4
