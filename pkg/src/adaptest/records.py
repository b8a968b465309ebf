"""Respondent response records and their file formats.

Responses travel as csv with header ``respondent_id,item_id,words`` (one row
per answered item, free text in the words column).  Criterion measures travel
as csv with header ``respondent_id,measure,score``.  Word-list corpora for
embedding training travel as jsonl, one ``{"words": [...]}`` object per line.
"""

from __future__ import annotations

import csv
import json
import string
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    DuplicateRespondent,
    IncompleteRecord,
    MalformedRow,
    SetMismatch,
    UnknownItemId,
)
from .items import ItemBank

_EDGE_CHARS = string.punctuation + string.whitespace


def tokenize(text: str) -> tuple[str, ...]:
    """Lowercase, split on whitespace, strip punctuation off word edges.

    Interior punctuation survives, so contractions and hyphenated words stay
    whole.  Tokens that are pure punctuation vanish.
    """
    out = []
    for raw in text.lower().split():
        word = raw.strip(_EDGE_CHARS)
        if word:
            out.append(word)
    return tuple(out)


@dataclass(frozen=True)
class RespondentRecord:
    """One respondent's tokenized answers, keyed by item id."""

    respondent_id: str
    responses: dict[int, tuple[str, ...]] = field(default_factory=dict)

    def words_for(self, item_id: int) -> tuple[str, ...]:
        return self.responses.get(item_id, ())

    def answered_items(self) -> list[int]:
        return sorted(self.responses)


def load_responses(
    path: str | Path,
    items: ItemBank,
    *,
    require_complete: bool = True,
) -> list[RespondentRecord]:
    """Read a responses csv and group rows into per-respondent records.

    Rows must carry a known item id; a repeated (respondent, item) pair is an
    error.  By default every respondent must answer every item with at least
    one surviving token; pass ``require_complete=False`` to keep partial
    records instead.
    """
    grouped: dict[str, dict[int, tuple[str, ...]]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["respondent_id", "item_id", "words"]:
            raise MalformedRow(1, "expected header respondent_id,item_id,words")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise MalformedRow(line_no, f"expected 3 fields, got {len(row)}")
            rid, raw_item, text = row[0].strip(), row[1].strip(), row[2]
            if not rid:
                raise MalformedRow(line_no, "empty respondent_id")
            try:
                item_id = int(raw_item)
            except ValueError:
                raise MalformedRow(line_no, f"item_id {raw_item!r} is not an integer") from None
            if item_id not in items:
                raise UnknownItemId(f"item_id {item_id} not in item bank (line {line_no})")
            per = grouped.setdefault(rid, {})
            if item_id in per:
                raise DuplicateRespondent(
                    f"respondent {rid!r} answers item {item_id} twice (line {line_no})"
                )
            per[item_id] = tokenize(text)
    records = []
    for rid, per in grouped.items():
        answered = {i: toks for i, toks in per.items() if toks}
        if require_complete:
            missing = [i for i in items.item_ids if i not in answered]
            if missing:
                raise IncompleteRecord(
                    f"respondent {rid!r} has no usable answer for items {missing}"
                )
        records.append(RespondentRecord(rid, answered))
    return records


def save_responses(path: str | Path, records: list[RespondentRecord]) -> None:
    """Write records back to the responses csv format (tokens joined by spaces)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["respondent_id", "item_id", "words"])
        for rec in records:
            for item_id in rec.answered_items():
                writer.writerow([rec.respondent_id, item_id, " ".join(rec.responses[item_id])])


def load_measures(path: str | Path, measure: str | None = None) -> dict[str, float]:
    """Read a measures csv, returning respondent_id -> score for one measure.

    When the file holds several measure names, ``measure`` must pick one.
    """
    rows: list[tuple[str, str, float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["respondent_id", "measure", "score"]:
            raise MalformedRow(1, "expected header respondent_id,measure,score")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise MalformedRow(line_no, f"expected 3 fields, got {len(row)}")
            rid, name = row[0].strip(), row[1].strip()
            if not rid:
                raise MalformedRow(line_no, "empty respondent_id")
            try:
                score = float(row[2])
            except ValueError:
                raise MalformedRow(line_no, f"score {row[2]!r} is not a number") from None
            rows.append((rid, name, score))
    names = sorted({name for _, name, _ in rows})
    if measure is None:
        if len(names) > 1:
            raise MalformedRow(0, f"file holds measures {names}; pick one explicitly")
        measure = names[0] if names else ""
    out: dict[str, float] = {}
    for rid, name, score in rows:
        if name != measure:
            continue
        if rid in out:
            raise DuplicateRespondent(f"respondent {rid!r} scored twice on measure {measure!r}")
        out[rid] = score
    return out


def save_measures(path: str | Path, scores: dict[str, float], measure: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["respondent_id", "measure", "score"])
        for rid in scores:
            writer.writerow([rid, measure, repr(scores[rid])])


def load_corpus(path: str | Path) -> list[list[str]]:
    """Read a jsonl corpus: one {"words": [...]} document per line."""
    docs = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                words = obj["words"]
            except (json.JSONDecodeError, TypeError, KeyError):
                raise MalformedRow(line_no, "expected a json object with a 'words' list") from None
            if not isinstance(words, list) or not all(isinstance(w, str) for w in words):
                raise MalformedRow(line_no, "'words' must be a list of strings")
            docs.append([w.lower() for w in words])
    return docs


def save_corpus(path: str | Path, docs: list[list[str]]) -> None:
    with open(path, "w") as fh:
        for words in docs:
            fh.write(json.dumps({"words": list(words)}) + "\n")


@dataclass(frozen=True)
class Dataset:
    """Responses joined with criterion scores, ready for model fitting."""

    items: ItemBank
    records: list[RespondentRecord]
    measures: dict[str, float]

    def __post_init__(self):
        rec_ids = {r.respondent_id for r in self.records}
        missing = sorted(rec_ids - set(self.measures))
        if missing:
            raise SetMismatch(f"respondents without a measure score: {missing[:5]}")

    @property
    def respondent_ids(self) -> list[str]:
        return [r.respondent_id for r in self.records]

    def subset(self, ids: set[str]) -> "Dataset":
        kept = [r for r in self.records if r.respondent_id in ids]
        return Dataset(
            self.items, kept, {r.respondent_id: self.measures[r.respondent_id] for r in kept}
        )

    def measure_vector(self) -> list[float]:
        return [self.measures[r.respondent_id] for r in self.records]
