import json
from pathlib import Path

import pytest

from medxtract import load_corpus, load_schema

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def transcript_schema():
    return load_schema(FIXTURES / "schema_transcript.json")


@pytest.fixture(scope="session")
def fixture_corpus(transcript_schema):
    return load_corpus(FIXTURES / "corpus20", "plain_text", schema=transcript_schema)


@pytest.fixture
def small_corpus(tmp_path):
    """Three-document plain_text corpus with full annotations."""
    docs = tmp_path / "corpus" / "docs"
    docs.mkdir(parents=True)
    annotations = {}
    for i, (name, age) in enumerate([("Ada Byrne", 52), ("Max Webb", 34), ("Lin Soto", 71)]):
        doc_id = f"d{i}"
        (docs / f"{doc_id}.txt").write_text(
            f"Visit note for {name}, age {age}. Reported fatigue.\n", encoding="utf-8"
        )
        annotations[doc_id] = {
            "patient_name": name,
            "age": str(age),
            "symptoms": ["fatigue"],
            "conditions": [],
            "medications": [],
            "precautions": [],
        }
    (tmp_path / "corpus" / "annotations.json").write_text(
        json.dumps(annotations), encoding="utf-8"
    )
    return tmp_path / "corpus"
