import itertools
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medxtract import (
    ExtractionResult,
    ExtractionSchema,
    FieldSpec,
    GoldRecord,
    TokenSeq,
    lcs_length,
    rouge_1,
    rouge_l,
    score_run,
    tokenize,
)
from medxtract.errors import AlignmentError

tokens = st.lists(st.sampled_from(["a", "b", "c"]), max_size=12).map(
    lambda t: TokenSeq(tuple(t))
)


# --- independent oracles -----------------------------------------------------

def overlap_oracle(candidate, reference) -> int:
    """Clipped multiset intersection by explicit counting."""
    c, r = Counter(candidate.tokens), Counter(reference.tokens)
    return sum(min(c[t], r[t]) for t in c)


def lcs_oracle(a, b) -> int:
    """Exhaustive: longest subsequence of a that is also a subsequence of b."""
    def is_subseq(s, t):
        it = iter(t)
        return all(x in it for x in s)

    best = 0
    for k in range(len(a.tokens), 0, -1):
        for combo in itertools.combinations(a.tokens, k):
            if is_subseq(combo, b.tokens):
                return k
    return best


# --- tokenize ----------------------------------------------------------------

def test_tokenize_rules():
    assert tokenize("Dizziness, nausea.").tokens == ("dizziness", "nausea")
    assert tokenize("").tokens == ()
    assert tokenize("85-year-old").tokens == ("85", "year", "old")


# --- rouge_1 -----------------------------------------------------------------

def test_rouge_1_identity():
    seq = tokenize("patient reported dizziness")
    score = rouge_1(seq, seq)
    assert (score.precision, score.recall, score.f1) == (1.0, 1.0, 1.0)


def test_rouge_1_hand_counted_case():
    cand = TokenSeq(("the", "patient", "reported", "dizziness"))
    ref = TokenSeq(("patient", "dizziness"))
    score = rouge_1(cand, ref)
    assert score.precision == 0.5
    assert score.recall == 1.0
    assert abs(score.f1 - 2 / 3) < 1e-12


def test_rouge_1_disjoint_is_zero():
    score = rouge_1(tokenize("alpha beta"), tokenize("gamma delta"))
    assert (score.precision, score.recall, score.f1) == (0.0, 0.0, 0.0)


def test_rouge_1_clipped_multiset():
    cand = TokenSeq(("a", "a", "a"))
    ref = TokenSeq(("a",))
    score = rouge_1(cand, ref)
    assert score.precision == pytest.approx(1 / 3)
    assert score.recall == 1.0


@settings(max_examples=300, deadline=None)
@given(cand=tokens, ref=tokens)
def test_rouge_1_matches_oracle(cand, ref):
    score = rouge_1(cand, ref)
    overlap = overlap_oracle(cand, ref)
    if cand.tokens and ref.tokens:
        assert score.precision == pytest.approx(overlap / len(cand.tokens), abs=1e-12)
        assert score.recall == pytest.approx(overlap / len(ref.tokens), abs=1e-12)
    else:
        assert score.f1 == 0.0


# --- lcs ---------------------------------------------------------------------

def test_lcs_known_case():
    assert lcs_length(TokenSeq(("a", "b", "d", "c")), TokenSeq(("a", "b", "c"))) == 3


def test_lcs_empty_and_identity():
    seq = TokenSeq(("x", "y", "z"))
    assert lcs_length(seq, TokenSeq(())) == 0
    assert lcs_length(TokenSeq(()), seq) == 0
    assert lcs_length(seq, seq) == 3


@settings(max_examples=200, deadline=None)
@given(
    a=st.lists(st.sampled_from(["a", "b", "c"]), max_size=8).map(lambda t: TokenSeq(tuple(t))),
    b=st.lists(st.sampled_from(["a", "b", "c"]), max_size=8).map(lambda t: TokenSeq(tuple(t))),
)
def test_lcs_matches_exhaustive_oracle(a, b):
    assert lcs_length(a, b) == lcs_oracle(a, b)


# --- rouge_l -----------------------------------------------------------------

def test_rouge_l_identity():
    seq = tokenize("one two three")
    score = rouge_l(seq, seq)
    assert (score.precision, score.recall, score.f1) == (1.0, 1.0, 1.0)


def test_rouge_l_derived_case():
    cand = TokenSeq(("a", "b", "d", "c"))
    ref = TokenSeq(("a", "b", "c"))
    score = rouge_l(cand, ref)
    assert score.precision == 0.75
    assert score.recall == 1.0
    assert abs(score.f1 - 6 / 7) < 1e-12


def test_rouge_l_disjoint_is_zero():
    score = rouge_l(tokenize("alpha"), tokenize("beta"))
    assert (score.precision, score.recall, score.f1) == (0.0, 0.0, 0.0)


# --- shared metric properties --------------------------------------------------

@settings(max_examples=300, deadline=None)
@given(cand=tokens, ref=tokens)
def test_swap_symmetry_and_bounds(cand, ref):
    for metric in (rouge_1, rouge_l):
        fwd = metric(cand, ref)
        rev = metric(ref, cand)
        assert fwd.precision == pytest.approx(rev.recall, abs=1e-12)
        assert fwd.recall == pytest.approx(rev.precision, abs=1e-12)
        assert fwd.f1 == pytest.approx(rev.f1, abs=1e-12)
        for v in (fwd.precision, fwd.recall, fwd.f1):
            assert 0.0 <= v <= 1.0
        assert fwd.f1 <= max(fwd.precision, fwd.recall) + 1e-12


@settings(max_examples=300, deadline=None)
@given(cand=tokens, ref=tokens)
def test_rouge_l_f1_never_exceeds_rouge_1_f1(cand, ref):
    assert rouge_l(cand, ref).f1 <= rouge_1(cand, ref).f1 + 1e-12


# --- score_run ---------------------------------------------------------------

SCHEMA = ExtractionSchema(
    name="mini",
    fields=(
        FieldSpec("a", "text", "field a"),
        FieldSpec("b", "text", "field b"),
    ),
)


def test_score_run_perfect_extraction():
    gold = [GoldRecord("d1", {"a": "x y", "b": "z"})]
    results = [ExtractionResult("d1", {"a": "x y", "b": "z"})]
    report = score_run(results, gold, SCHEMA)
    assert report.rouge_1_f1 == 1.0
    assert report.rouge_l_f1 == 1.0


def test_score_run_all_failed():
    gold = [GoldRecord("d1", {"a": "x y", "b": "z"})]
    results = [ExtractionResult("d1", {"a": "", "b": ""}, status="failed")]
    report = score_run(results, gold, SCHEMA)
    assert report.rouge_1_f1 == 0.0
    assert report.rouge_l_f1 == 0.0


def test_score_run_spreadsheet_oracle():
    # Hand recomputation: doc1 perfect on both fields -> 1.0.
    # doc2 field a: cand (p q) vs ref (p q r): P=1, R=2/3, F1=0.8; field b: 1.0.
    # doc2 mean = 0.9; aggregate = (1.0 + 0.9) / 2 = 0.95. Same for ROUGE-L.
    gold = [
        GoldRecord("d1", {"a": "x y", "b": "z"}),
        GoldRecord("d2", {"a": "p q r", "b": "s"}),
    ]
    results = [
        ExtractionResult("d1", {"a": "x y", "b": "z"}),
        ExtractionResult("d2", {"a": "p q", "b": "s"}),
    ]
    report = score_run(results, gold, SCHEMA)
    assert report.rouge_1_f1 == pytest.approx(0.95, abs=1e-12)
    assert report.rouge_l_f1 == pytest.approx(0.95, abs=1e-12)


def test_score_run_empty_gold_fields_excluded():
    gold = [GoldRecord("d1", {"a": "x", "b": ""})]
    results = [ExtractionResult("d1", {"a": "x", "b": "made up"})]
    report = score_run(results, gold, SCHEMA)
    # field b has empty gold: excluded from the mean rather than scored
    assert report.rouge_1_f1 == 1.0


def test_score_run_list_values_joined():
    schema = ExtractionSchema(
        name="lists", fields=(FieldSpec("events", "list_of_text", "events"),)
    )
    gold = [GoldRecord("d1", {"events": ["dizziness", "nausea"]})]
    results = [ExtractionResult("d1", {"events": ["dizziness", "nausea"]})]
    assert score_run(results, gold, schema).rouge_1_f1 == 1.0


def test_score_run_alignment_error():
    gold = [GoldRecord("d1", {"a": "x", "b": "y"})]
    results = [ExtractionResult("d9", {"a": "x", "b": "y"})]
    with pytest.raises(AlignmentError):
        score_run(results, gold, SCHEMA)


def test_report_csv_rows(tmp_path):
    gold = [GoldRecord("d1", {"a": "x", "b": "y"})]
    results = [ExtractionResult("d1", {"a": "x", "b": "y"})]
    report = score_run(results, gold, SCHEMA)
    out = tmp_path / "scores.csv"
    report.write_csv(out)
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 1 + 2  # header + one row per field
    assert lines[0].startswith("document_id,field,rouge_1_precision")
