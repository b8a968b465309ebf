"""Item bank: the questions an assessment can administer."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class ItemDescriptor:
    item_id: int
    question_text: str
    shorthand: str
    min_words: int = 1


class ItemBank:
    """Ordered collection of items with contiguous ids 1..J."""

    def __init__(self, items: list[ItemDescriptor]):
        if len(items) < 2:
            raise ValueError("item bank needs at least 2 items")
        by_id = {it.item_id: it for it in sorted(items, key=lambda it: it.item_id)}
        expected = list(range(1, len(items) + 1))
        if sorted(by_id) != expected:
            raise ValueError(f"item ids must be contiguous 1..{len(items)}")
        self._by_id = by_id

    @property
    def J(self) -> int:
        return len(self._by_id)

    @property
    def item_ids(self) -> list[int]:
        return list(self._by_id)

    def __iter__(self):
        return iter(self._by_id.values())

    def __len__(self) -> int:
        return len(self._by_id)

    def __contains__(self, item_id: int) -> bool:
        return item_id in self._by_id

    def get(self, item_id: int) -> ItemDescriptor:
        return self._by_id[item_id]

    def to_json(self) -> list[dict]:
        return [
            {
                "item_id": it.item_id,
                "question_text": it.question_text,
                "shorthand": it.shorthand,
                "min_words": it.min_words,
            }
            for it in self
        ]

    @classmethod
    def from_json(cls, data: list[dict]) -> "ItemBank":
        return cls(
            [
                ItemDescriptor(
                    item_id=int(row["item_id"]),
                    question_text=str(row["question_text"]),
                    shorthand=str(row["shorthand"]),
                    min_words=int(row.get("min_words", 1)),
                )
                for row in data
            ]
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ItemBank":
        return cls.from_json(json.loads(Path(path).read_text()))


def demo_item_bank() -> ItemBank:
    """A small built-in bank of open-ended wellbeing prompts for demos and tests."""
    rows = [
        (1, "Describe your overall mood during the past two weeks.", "Mood", 5),
        (2, "Describe how you have been viewing yourself lately.", "Self-view", 5),
        (3, "Describe any feelings of sadness or low spirits recently.", "Low mood", 5),
        (4, "Describe how calm or uneasy your mind has been.", "Calmness", 3),
        (5, "Describe how content you feel with your life these days.", "Contentment", 3),
        (6, "Describe how restless or slowed down your body has felt.", "Restlessness", 2),
        (7, "Describe how you have been sleeping recently.", "Sleep", 2),
        (8, "Describe your ability to focus on everyday tasks.", "Focus", 2),
        (9, "Describe your interest in food lately.", "Appetite", 2),
        (10, "Describe how much energy you have had day to day.", "Energy", 2),
        (11, "Describe your interest in things you usually enjoy.", "Interest", 2),
    ]
    return ItemBank(
        [ItemDescriptor(i, q, s, m) for i, q, s, m in rows]
    )
