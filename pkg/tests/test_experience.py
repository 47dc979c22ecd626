"""Experience store: insert/update routing, versioning, history, atomicity."""

import random

import pytest

from storyreel.clocks import LogicalClock
from storyreel.errors import NotFoundError, SynthesizerFailureError
from storyreel.rag import (
    Author,
    ExperienceCategory,
    ExperienceStore,
    FeedbackRecord,
)
from storyreel.rag.experience import PassthroughSynthesizer

from conftest import random_text
from oracles import oracle_cosine, oracle_embed


def fb(text, category=ExperienceCategory.PROMPT, fid=None):
    fb.counter = getattr(fb, "counter", 0) + 1
    return FeedbackRecord(
        id=fid or f"fb-{fb.counter}",
        category=category,
        text=text,
        author=Author.HUMAN_REVIEWER,
        created_at=0,
    )


def test_first_feedback_inserts_v1():
    store = ExperienceStore(clock=LogicalClock())
    update = store.update_experience(fb("keep character design before action planning"))
    assert update.inserted
    assert update.entry.version == 1
    assert update.entry.provenance == (update.entry.provenance[0],)


def test_identical_text_updates_in_place():
    store = ExperienceStore(clock=LogicalClock())
    first = store.update_experience(fb("add shot number planning", fid="f1"))
    second = store.update_experience(fb("add shot number planning", fid="f2"))
    assert second.updated
    assert second.entry.id == first.entry.id
    assert second.entry.version == 2
    assert second.entry.provenance == ("f1", "f2")
    assert len(store.entries()) == 1


def test_unrelated_text_inserts_new_entry():
    store = ExperienceStore(clock=LogicalClock())
    store.update_experience(fb("add shot number planning during action division"))
    update = store.update_experience(fb("render misty harbors with warm lantern light"))
    assert update.inserted
    assert len(store.entries()) == 2


def test_same_text_different_category_inserts():
    store = ExperienceStore(clock=LogicalClock())
    store.update_experience(fb("prefer wide framing", ExperienceCategory.PROMPT))
    update = store.update_experience(fb("prefer wide framing", ExperienceCategory.IMAGE))
    assert update.inserted
    assert {e.category for e in store.entries()} == {
        ExperienceCategory.PROMPT,
        ExperienceCategory.IMAGE,
    }


def test_update_rewrites_text_and_reembeds():
    class Synth(PassthroughSynthesizer):
        def merge(self, feedback_text, existing_text):
            return f"{existing_text}; refined: {feedback_text}"

    store = ExperienceStore(clock=LogicalClock())
    store.update_experience(fb("add shot number planning", fid="f1"), Synth())
    update = store.update_experience(fb("add shot number planning early", fid="f2"), Synth())
    assert update.updated
    assert update.entry.text == "add shot number planning; refined: add shot number planning early"
    assert update.previous_text == "add shot number planning"
    # embedding matches the new text, not the old one
    assert list(update.entry.embedding.values) == oracle_embed(update.entry.text)


def test_history_has_one_row_per_version():
    store = ExperienceStore(clock=LogicalClock())
    store.update_experience(fb("always show the weather", fid="f1"))
    store.update_experience(fb("always show the weather", fid="f2"))
    third = store.update_experience(fb("always show the weather", fid="f3"))
    history = store.history(third.entry.id)
    assert [v for v, _, _ in history] == [1, 2, 3]
    assert [f for _, _, f in history] == ["f1", "f2", "f3"]
    assert third.entry.version == 3
    assert len(third.entry.provenance) == third.entry.version


def test_history_unknown_entry():
    store = ExperienceStore()
    with pytest.raises(NotFoundError):
        store.history("e:404")


def test_synthesizer_failure_leaves_files_untouched(tmp_path):
    class Boom:
        def create(self, text):
            raise RuntimeError("llm down")

        def merge(self, text, existing):
            raise RuntimeError("llm down")

    log = tmp_path / "experience.log"
    hist = tmp_path / "history.log"
    store = ExperienceStore(log, hist, clock=LogicalClock())
    store.update_experience(fb("first lesson about framing"))
    before_log = log.read_bytes()
    before_hist = hist.read_bytes() if hist.exists() else b""

    with pytest.raises(SynthesizerFailureError):
        store.update_experience(fb("first lesson about framing"), Boom())  # update path
    with pytest.raises(SynthesizerFailureError):
        store.update_experience(fb("zzz completely new unrelated"), Boom())  # insert path

    assert log.read_bytes() == before_log
    assert (hist.read_bytes() if hist.exists() else b"") == before_hist
    assert len(store.entries()) == 1
    assert store.entries()[0].version == 1


def test_superseded_text_archived_in_history_log(tmp_path):
    import json

    log = tmp_path / "experience.log"
    hist = tmp_path / "history.log"
    store = ExperienceStore(log, hist, clock=LogicalClock())
    store.update_experience(fb("lesson one", fid="f1"))
    store.update_experience(fb("lesson one", fid="f2"))
    rows = [json.loads(line) for line in hist.read_text().splitlines()]
    assert len(rows) == 1
    assert rows[0]["version"] == 1
    assert rows[0]["feedback_id"] == "f1"


def test_replay_restores_versions_and_history(tmp_path):
    log = tmp_path / "experience.log"
    store = ExperienceStore(log, tmp_path / "history.log", clock=LogicalClock())
    store.update_experience(fb("lesson one", fid="f1"))
    store.update_experience(fb("lesson one", fid="f2"))
    store.update_experience(fb("a different unrelated thought", fid="f3"))

    reopened = ExperienceStore(log, tmp_path / "history.log", clock=LogicalClock())
    assert len(reopened.entries()) == 2
    original = {e.id: e for e in store.entries()}
    for entry in reopened.entries():
        assert entry == original[entry.id]
    first_id = store.entries()[0].id
    assert reopened.history(first_id) == store.history(first_id)


def test_update_threshold_routing_matches_cosine_oracle(rng):
    """Randomized check of the insert/update decision against the oracle."""
    store = ExperienceStore(clock=LogicalClock())
    mirror = []  # (entry_id, text, category) in insertion order
    categories = list(ExperienceCategory)
    for i in range(400):
        category = rng.choice(categories)
        text = random_text(rng, 2, 8)
        qv = oracle_embed(text)
        candidates = [
            (idx, eid, oracle_cosine(qv, oracle_embed(t)))
            for idx, (eid, t, c) in enumerate(mirror)
            if c == category
        ]
        candidates = [c for c in candidates if c[2] >= 0.60]
        candidates.sort(key=lambda c: (-c[2], c[0]))
        update = store.update_experience(fb(text, category, fid=f"r{i}"))
        if candidates:
            assert update.updated, f"case {i}: oracle says update"
            assert update.entry.id == candidates[0][1]
            idx = next(j for j, m in enumerate(mirror) if m[0] == update.entry.id)
            mirror[idx] = (update.entry.id, update.entry.text, category)
        else:
            assert update.inserted, f"case {i}: oracle says insert"
            mirror.append((update.entry.id, update.entry.text, category))
