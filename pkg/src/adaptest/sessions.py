"""Live assessment sessions: one respondent answering in real time.

A session wraps a fitted pipeline, walks the chosen selection policy, and
records an append-only transcript of events.  Replaying a transcript through
``replay_transcript`` reproduces every estimate, which is the live/batch
equivalence contract."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .embeddings import embed_response
from .errors import (
    NoItemsRemaining,
    SessionFinished,
    UnknownStrategy,
    WrongItem,
)
from .items import ItemDescriptor
from .pipeline import FittedPipeline
from .polytomize import apply_thresholds
from .strategies import (
    SessionState,
    actor_critic_score,
    advance,
    ctt_score,
    initial_state,
)

SCORINGS = ("latent", "ctt", "both")


@dataclass(frozen=True)
class StepResult:
    """Everything produced by one accepted response."""

    step: int
    item_id: int
    level: int
    yhat: float
    theta: float
    posterior_sd: float
    ctt: float
    done: bool
    next_item: int | None


class AssessmentSession:
    """One respondent's in-progress assessment.

    Both scoring paradigms are computed on every step; ``scoring`` controls
    which estimates the caller exposes.  The random strategy draws its order
    from (pipeline seed, session_id), so a transcript replays exactly.
    """

    def __init__(
        self,
        pipeline: FittedPipeline,
        *,
        strategy: str,
        scoring: str = "both",
        max_items: int = 5,
        session_id: str = "session",
    ):
        if strategy not in pipeline.available_strategies:
            raise UnknownStrategy(
                f"strategy {strategy!r} not in bundle "
                f"(available: {', '.join(pipeline.available_strategies)})"
            )
        if scoring not in SCORINGS:
            raise UnknownStrategy(f"scoring {scoring!r} not one of {SCORINGS}")
        if max_items < 1:
            raise ValueError("max_items must be >= 1")
        self.pipeline = pipeline
        self.strategy = strategy
        self.scoring = scoring
        self.max_items = min(max_items, len(pipeline.item_ids))
        self.session_id = session_id
        self._policy = pipeline.policy(strategy)
        self.state: SessionState = initial_state(
            pipeline.item_ids, theta0=pipeline.theta0
        )
        self.results: list[StepResult] = []
        self.current_item: int | None = self._policy.next_item(self.state, session_id)
        self.events: list[dict] = [
            {
                "event": "created",
                "session_id": session_id,
                "strategy": strategy,
                "scoring": scoring,
                "max_items": self.max_items,
                "first_item": self.current_item,
            }
        ]

    @property
    def step(self) -> int:
        return self.state.step

    @property
    def done(self) -> bool:
        return self.current_item is None

    def question(self) -> ItemDescriptor | None:
        if self.current_item is None:
            return None
        return self.pipeline.items.get(self.current_item)

    def _ctt_estimate(self) -> float:
        if self.strategy == "actor_critic":
            return actor_critic_score(self.pipeline.actor_critic, self.state)
        return ctt_score(self.state)

    def submit(self, item_id: int, words: Sequence[str]) -> StepResult:
        """Score one response to the pending question and pick the next item.

        An all-out-of-vocabulary answer raises without consuming the step —
        the same question stays pending."""
        if self.done:
            raise SessionFinished(
                f"session {self.session_id!r} already administered "
                f"{len(self.results)} items"
            )
        if item_id != self.current_item:
            raise WrongItem(
                f"expected a response to item {self.current_item}, got {item_id}"
            )
        vector = embed_response(self.pipeline.embeddings, list(words))
        yhat = float(self.pipeline.item_models[item_id].predict(vector))
        level = apply_thresholds(self.pipeline.thresholds, yhat, item_id)
        self.state = advance(self.pipeline.grm, self.state, item_id, level, yhat)
        theta = self.state.theta
        ctt = self._ctt_estimate()
        done = len(self.state.administered) >= self.max_items or self.state.done
        next_item = None
        if not done:
            try:
                next_item = self._policy.next_item(self.state, self.session_id)
            except NoItemsRemaining:
                done = True
        self.current_item = next_item
        result = StepResult(
            step=len(self.state.administered),
            item_id=item_id,
            level=level,
            yhat=yhat,
            theta=theta.theta,
            posterior_sd=theta.posterior_sd,
            ctt=ctt,
            done=done,
            next_item=next_item,
        )
        self.results.append(result)
        self.events.append(
            {
                "event": "response",
                "item_id": item_id,
                "words": list(words),
                "level": level,
                "yhat": yhat,
                "theta": theta.theta,
                "posterior_sd": theta.posterior_sd,
                "ctt": ctt,
                "step": result.step,
                "done": done,
                "next_item": next_item,
            }
        )
        return result

    def estimates(self) -> dict[str, float]:
        """The estimates this session's scoring mode exposes (empty before
        the first response)."""
        if not self.results:
            return {}
        last = self.results[-1]
        out: dict[str, float] = {}
        if self.scoring in ("latent", "both"):
            out["theta"] = last.theta
        if self.scoring in ("ctt", "both"):
            out["yhat"] = last.ctt
        return out

    def snapshot(self) -> dict:
        """Full state view: config, per-step trajectory, pending question."""
        question = self.question()
        return {
            "session_id": self.session_id,
            "strategy": self.strategy,
            "scoring": self.scoring,
            "max_items": self.max_items,
            "step": self.step,
            "done": self.done,
            "estimates": self.estimates(),
            "trajectory": [
                {
                    "step": r.step,
                    "item_id": r.item_id,
                    **(
                        {"theta": r.theta, "posterior_sd": r.posterior_sd}
                        if self.scoring in ("latent", "both")
                        else {}
                    ),
                    **({"yhat": r.ctt} if self.scoring in ("ctt", "both") else {}),
                }
                for r in self.results
            ],
            "question": (
                {
                    "item_id": question.item_id,
                    "text": question.question_text,
                    "min_words": question.min_words,
                }
                if question
                else None
            ),
        }


def write_transcript(session: AssessmentSession, path: str | Path) -> None:
    with open(path, "w") as fh:
        for event in session.events:
            fh.write(json.dumps(event, sort_keys=True) + "\n")


def read_transcript(path: str | Path) -> list[dict]:
    events = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(json.loads(line))
    return events


def replay_transcript(
    pipeline: FittedPipeline, events: Iterable[dict]
) -> AssessmentSession:
    """Re-run a recorded session through the library (no HTTP): same bundle,
    same config, same responses, therefore the same estimates."""
    events = list(events)
    if not events or events[0].get("event") != "created":
        raise ValueError("transcript must start with a created event")
    head = events[0]
    session = AssessmentSession(
        pipeline,
        strategy=head["strategy"],
        scoring=head["scoring"],
        max_items=head["max_items"],
        session_id=head["session_id"],
    )
    for event in events[1:]:
        if event.get("event") != "response":
            continue
        session.submit(event["item_id"], event["words"])
    return session
