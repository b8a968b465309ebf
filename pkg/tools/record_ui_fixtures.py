"""Record real service traffic into the frontend's contract fixtures.

Builds a small deployable pipeline over the built-in question bank, runs one
scripted session against the HTTP app, and saves every request/response pair
as json.  The browser client's tests replay these fixtures through a fake
fetch, so the UI is tested against genuine service payloads without a running
server.  Regenerate with:  python3 tools/record_ui_fixtures.py
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from adaptest.items import demo_item_bank
from adaptest.pipeline import fit_pipeline
from adaptest.records import Dataset
from adaptest.service import create_app
from adaptest.splits import make_splits
from adaptest.synthetic import SyntheticCohortSpec, simulate_language_cohort

OUT = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures" / "session.json"


def main() -> None:
    spec = SyntheticCohortSpec(n=108, J=11, K=4, seed=23, embed_dim=6, embed_noise=0.8)
    synthetic, embeddings, _ = simulate_language_cohort(spec)
    dataset = Dataset(demo_item_bank(), synthetic.records, synthetic.measures)
    split = make_splits(dataset.respondent_ids, 23)[0]
    pipeline = fit_pipeline(
        dataset,
        embeddings,
        K=4,
        seed=23,
        train_ids=split.train_ids,
        poly_ids=split.poly_ids,
        strategies=("alirt", "random"),
    )
    app = create_app(
        pipeline,
        {"measure": "wellbeing", "max_items": 5, "score_exposure": "trajectory"},
    )

    respondent = next(
        r for r in dataset.records if r.respondent_id in split.test_ids
    )

    fixture: dict = {}
    with TestClient(app) as client:
        fixture["health"] = client.get("/api/health").json()
        fixture["items"] = client.get("/api/items").json()

        create_req = {"strategy": "alirt", "scoring": "both", "max_items": 5}
        res = client.post("/api/sessions", json=create_req)
        assert res.status_code == 201, res.text
        fixture["create"] = {"request": create_req, "status": 201, "body": res.json()}
        session_id = res.json()["session_id"]
        question = res.json()["question"]

        oov_req = {"item_id": question["item_id"], "words": ["qqqq", "zzzz"]}
        res = client.post(f"/api/sessions/{session_id}/responses", json=oov_req)
        assert res.status_code == 422, res.text
        fixture["oov"] = {"request": oov_req, "status": 422, "body": res.json()}

        steps = []
        snapshots = {}
        while question is not None:
            word = respondent.words_for(question["item_id"])[0]
            req = {
                "item_id": question["item_id"],
                "words": [word] * question["min_words"],
            }
            res = client.post(f"/api/sessions/{session_id}/responses", json=req)
            assert res.status_code == 200, res.text
            body = res.json()
            steps.append({"request": req, "status": 200, "body": body})
            if body["step"] == 2:
                snapshots["after_step_2"] = client.get(f"/api/sessions/{session_id}").json()
            question = body["question"]
        snapshots["done"] = client.get(f"/api/sessions/{session_id}").json()

        fixture["session_id"] = session_id
        fixture["steps"] = steps
        fixture["snapshots"] = snapshots

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(fixture, indent=2, sort_keys=True) + "\n")
    print(f"wrote {OUT} ({len(steps)} steps)")


if __name__ == "__main__":
    main()
