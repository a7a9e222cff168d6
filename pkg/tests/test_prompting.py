import pytest

from medxtract import (
    Chunk,
    ExtractionSchema,
    FieldSpec,
    PromptSpec,
    ShotExample,
    Strategy,
    build_prompt,
    strategy_shots,
)
from medxtract.errors import InsufficientExamples
from medxtract.prompting import ANSWER_HEADER, QUERY_HEADER, query_section

SCHEMA = ExtractionSchema(
    name="s",
    fields=(FieldSpec("name", "text", "patient name"),),
)
POOL = [
    ShotExample("basic case", '{"name": "A"}'),
    ShotExample("harder case one", '{"name": "B"}'),
    ShotExample("harder case two", '{"name": "C"}'),
]
CHUNK = Chunk(document_id="d", index=0, text="the query narrative", token_estimate=5)


def _spec(shots):
    return PromptSpec(task_description="Extract fields.", shots=tuple(shots), schema=SCHEMA)


def test_zero_shot_has_no_example_section():
    prompt = build_prompt(_spec([]), CHUNK)
    assert "### Example" not in prompt
    assert ANSWER_HEADER not in prompt
    # section order: task, schema, query
    assert prompt.index("Extract fields.") < prompt.index("- name (text)")
    assert prompt.index("- name (text)") < prompt.index(QUERY_HEADER)
    assert prompt.endswith(CHUNK.text)


def test_three_shot_block_order():
    prompt = build_prompt(_spec(POOL), CHUNK)
    positions = [prompt.index(f"### Example {k}") for k in (1, 2, 3)]
    assert positions == sorted(positions)
    assert prompt.count("### Example") == 3
    assert prompt.index("Extract fields.") < positions[0]
    assert positions[-1] < prompt.index(QUERY_HEADER)
    for shot in POOL:
        assert shot.input_excerpt in prompt
        assert shot.expected_output in prompt


def test_prompt_is_deterministic():
    spec = _spec(POOL)
    assert build_prompt(spec, CHUNK) == build_prompt(spec, CHUNK)


def test_query_appears_exactly_once_after_examples():
    prompt = build_prompt(_spec(POOL), CHUNK)
    assert prompt.count(CHUNK.text) == 1
    assert prompt.index(CHUNK.text) > prompt.index("### Example 3")


def test_few_shot_extends_one_shot_verbatim():
    one = build_prompt(_spec(strategy_shots(Strategy.from_name("one_shot"), POOL)), CHUNK)
    few = build_prompt(_spec(strategy_shots(Strategy.from_name("few_shot"), POOL)), CHUNK)
    one_example_block = one[one.index("### Example 1") : one.index(QUERY_HEADER)].rstrip()
    assert one_example_block in few
    assert few.index(one_example_block) < few.index("### Example 2")


def test_prompt_length_monotone_in_shot_count():
    lengths = [
        len(build_prompt(_spec(POOL[:k]), CHUNK)) for k in range(0, 4)
    ]
    assert lengths == sorted(lengths)


def test_strategy_shot_counts():
    assert Strategy.from_name("zero_shot").shot_count == 0
    assert Strategy.from_name("one_shot").shot_count == 1
    assert Strategy.from_name("few_shot").shot_count == 3
    assert Strategy.from_name("five_shot", shot_count=5).shot_count == 5
    with pytest.raises(ValueError):
        Strategy.from_name("few_shot", shot_count=2)
    with pytest.raises(ValueError):
        Strategy.from_name("custom")


def test_strategy_shots_selection():
    assert strategy_shots(Strategy.from_name("one_shot"), POOL) == [POOL[0]]
    assert strategy_shots(Strategy.from_name("few_shot"), POOL) == POOL
    assert strategy_shots(Strategy.from_name("zero_shot"), []) == []
    with pytest.raises(InsufficientExamples):
        strategy_shots(Strategy.from_name("few_shot"), POOL[:2])


def test_shot_pool_limit():
    with pytest.raises(ValueError):
        PromptSpec(task_description="t", shots=tuple(POOL * 2), schema=SCHEMA)


def test_shot_validation_against_schema():
    good = ShotExample("in", '{"name": "A"}')
    good.validate(SCHEMA)
    bad = ShotExample("in", "not json at all")
    with pytest.raises(ValueError):
        bad.validate(SCHEMA)


def test_query_section_round_trip():
    prompt = build_prompt(_spec(POOL), CHUNK)
    assert query_section(prompt) == CHUNK.text
