"""Similarity, agreement, and correlation analyses."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chemembed.embeddings import EmbeddingTable, top_k
from chemembed.errors import DataError, ParseError
from chemembed.intrinsic import (NormalizationDictionary, agreement_matrix,
                                 correlation_matrix, jaccard, normalize_list,
                                 read_normalization_dict,
                                 similarity_query_report)

from helpers import random_orthogonal, random_table


def pearson_oracle(x, y):
    """Direct Pearson formula: sums only, no library correlation call."""
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y))
    vx = sum((a - mx) ** 2 for a in x)
    vy = sum((b - my) ** 2 for b in y)
    return cov / (vx ** 0.5 * vy ** 0.5)


class TestJaccard:
    def test_basic_value(self):
        assert jaccard({"x", "y"}, {"y", "z"}) == pytest.approx(1 / 3)

    def test_identical_non_empty_sets(self):
        assert jaccard({"a", "b"}, {"a", "b"}) == 1.0

    def test_both_empty_is_one_with_warning(self):
        with pytest.warns(UserWarning):
            assert jaccard(set(), set()) == 1.0

    @settings(max_examples=60, deadline=None)
    @given(st.sets(st.integers(0, 19), max_size=20),
           st.sets(st.integers(0, 19), max_size=20))
    def test_matches_enumeration_oracle(self, a, b):
        if not a and not b:
            return
        both = sum(1 for x in a if x in b)
        either = len(set(list(a) + list(b)))
        assert jaccard(a, b) == pytest.approx(both / either)
        assert jaccard(a, b) == jaccard(b, a)
        assert 0.0 <= jaccard(a, b) <= 1.0


class TestNormalization:
    def test_dictionary_lookup_is_case_insensitive(self):
        d = read_normalization_dict(b"Aspirin\tInChI=1S/A\n")
        assert d.lookup("ASPIRIN") == "InChI=1S/A"

    def test_duplicate_terms_rejected(self):
        with pytest.raises(ParseError, match="duplicate"):
            read_normalization_dict(b"a\tI1\nA\tI2\n")

    def test_matched_term_maps_to_identifier(self):
        d = NormalizationDictionary({"aspirin": "I1"})
        result = normalize_list(["aspirin"], d)
        assert set(result.identifiers) == {"I1"}
        assert result.unmatched == ()

    def test_drop_policy_discards_unmatched(self):
        d = NormalizationDictionary({})
        result = normalize_list(["unknownword"], d, fallback="drop")
        assert set(result.identifiers) == set()
        assert result.unmatched == ("unknownword",)

    def test_surface_fallback_keeps_sentinels(self):
        d = NormalizationDictionary({})
        result = normalize_list(["UnknownWord"], d)
        assert set(result.identifiers) == {"surface:unknownword"}

    def test_synonyms_collapse_to_one_identifier(self):
        d = NormalizationDictionary({"asa": "I1", "aspirin": "I1", "tylenol": "I2"})
        result = normalize_list(["asa", "aspirin", "tylenol"], d)
        assert set(result.identifiers) == {"I1", "I2"}

    def test_unknown_policy_rejected(self):
        with pytest.raises(ValueError):
            normalize_list([], NormalizationDictionary({}), fallback="bogus")


class TestAgreement:
    DICT = NormalizationDictionary({f"w{i}": f"I{i}" for i in range(20)})

    def test_identical_lists_agree_fully(self):
        lists = [("a", ["w1", "w2"]), ("b", ["w1", "w2"])]
        report = agreement_matrix(lists, self.DICT)
        assert report.jaccard[0, 1] == 1.0

    def test_disjoint_lists_agree_zero(self):
        lists = [("a", ["w1", "w2"]), ("b", ["w3", "w4"])]
        report = agreement_matrix(lists, self.DICT)
        assert report.jaccard[0, 1] == 0.0

    def test_seven_of_thirteen_union(self):
        # two top-10 lists sharing 7 identifiers, union of 13
        shared = [f"w{i}" for i in range(7)]
        a = shared + ["w7", "w8", "w9"]
        b = shared + ["w10", "w11", "w12"]
        report = agreement_matrix([("a", a), ("b", b)], self.DICT)
        assert report.jaccard[0, 1] == pytest.approx(7 / 13)

    def test_needs_two_lists(self):
        with pytest.raises(ValueError):
            agreement_matrix([("a", ["w1"])], self.DICT)

    def test_matrix_symmetric_diagonal_one(self):
        lists = [("a", ["w1", "w2"]), ("b", ["w2", "w3"]), ("c", ["w4"])]
        report = agreement_matrix(lists, self.DICT)
        assert np.array_equal(report.jaccard, report.jaccard.T)
        np.testing.assert_array_equal(np.diag(report.jaccard), 1.0)


class TestCorrelation:
    def test_table_against_copy_is_one(self):
        rng = np.random.default_rng(0)
        table = random_table(rng, 12, 5, name="a")
        copy = EmbeddingTable(table.vocab, table.vectors.copy(), name="b")
        report = correlation_matrix([table, copy])
        assert abs(report.pearson[0, 1] - 1.0) < 1e-12

    def test_invariant_under_rotation_and_rescaling(self):
        rng = np.random.default_rng(1)
        table = random_table(rng, 15, 6, name="a")
        q = random_orthogonal(rng, 6)
        rotated = EmbeddingTable(table.vocab, table.vectors @ q, name="rot")
        scaled = EmbeddingTable(table.vocab, table.vectors * 4.2, name="scl")
        report = correlation_matrix([table, rotated, scaled])
        np.testing.assert_allclose(report.pearson, 1.0, atol=1e-8)

    def test_independent_tables_match_pearson_oracle(self):
        highs = []
        for seed in range(100):
            rng = np.random.default_rng(seed)
            a = random_table(rng, 20, 6, name="a")
            b = EmbeddingTable(a.vocab, rng.normal(size=(20, 6)), name="b")
            report = correlation_matrix([a, b])
            r = report.pearson[0, 1]
            highs.append(abs(r) >= 0.4)
            if seed < 10:
                shared = sorted(a.vocab)
                profiles = []
                for table in (a, b):
                    rows = np.stack([table.vector(w) for w in shared])
                    unit = rows / np.linalg.norm(rows, axis=1, keepdims=True)
                    sims = unit @ unit.T
                    profiles.append(sims[np.triu_indices(len(shared), k=1)])
                oracle = pearson_oracle(list(profiles[0]), list(profiles[1]))
                assert abs(r - oracle) < 1e-10
        assert not any(highs)

    def test_shared_vocabulary_is_sorted_intersection(self):
        a = EmbeddingTable(("b", "a", "c", "x"), np.random.default_rng(2).normal(size=(4, 3)), name="a")
        b = EmbeddingTable(("c", "b", "a", "y"), np.random.default_rng(3).normal(size=(4, 3)), name="b")
        report = correlation_matrix([a, b])
        assert report.shared_vocab == ("a", "b", "c")
        assert report.shared_vocab_size == 3

    def test_too_small_shared_vocab(self):
        a = EmbeddingTable(("a", "b"), np.ones((2, 2)) + np.eye(2))
        b = EmbeddingTable(("a", "b"), np.ones((2, 2)) + np.eye(2))
        with pytest.raises(DataError, match="shared"):
            correlation_matrix([a, b])

    def test_zero_variance_profile_names_table(self):
        vecs = np.array([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])
        flat = EmbeddingTable(("a", "b", "c"), vecs, name="flat")
        other = random_table(np.random.default_rng(4), 3, 2, name="ok")
        other = EmbeddingTable(("a", "b", "c"), other.vectors, name="ok")
        with pytest.raises(DataError, match="flat"):
            correlation_matrix([flat, other])


class TestSimilarityReport:
    def test_missing_tables_noted(self):
        rng = np.random.default_rng(5)
        a = random_table(rng, 10, 4, name="a")
        b = random_table(rng, 10, 4, name="b")
        query = a.vocab[0]
        report = similarity_query_report([a, b], query, 3)
        assert report.missing == ("b",)
        assert [name for name, _ in report.neighbor_lists] == ["a"]

    def test_equals_individual_top_k_calls(self):
        rng = np.random.default_rng(6)
        shared = random_table(rng, 12, 4, name="base")
        a = EmbeddingTable(shared.vocab, rng.normal(size=(12, 4)), name="a")
        b = EmbeddingTable(shared.vocab, rng.normal(size=(12, 4)), name="b")
        query = shared.vocab[3]
        report = similarity_query_report([a, b], query, 5)
        for name, neighbor_list in report.neighbor_lists:
            table = a if name == "a" else b
            assert neighbor_list == top_k(table, query, 5)

    def test_query_nowhere_is_error(self):
        rng = np.random.default_rng(7)
        a = random_table(rng, 5, 3, name="a")
        with pytest.raises(DataError):
            similarity_query_report([a], "definitely-not-present", 3)
