import pytest

from adaptest.pipeline import ALL_STRATEGIES, fit_pipeline
from adaptest.splits import make_splits
from adaptest.synthetic import SyntheticCohortSpec, simulate_language_cohort

# one line per release-gate check, collected by tests/test_acceptance.py
SCORECARD: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if SCORECARD:
        terminalreporter.section("acceptance scorecard")
        for line in SCORECARD:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_cohort():
    spec = SyntheticCohortSpec(
        n=108, J=4, K=4, seed=3, embed_dim=6, embed_noise=0.8, measure_noise=1.0
    )
    dataset, embeddings, _ = simulate_language_cohort(spec)
    return dataset, embeddings


@pytest.fixture(scope="session")
def small_pipeline(small_cohort):
    dataset, embeddings = small_cohort
    split = make_splits(dataset.respondent_ids, 17)[0]
    return fit_pipeline(
        dataset,
        embeddings,
        K=4,
        seed=17,
        train_ids=split.train_ids,
        poly_ids=split.poly_ids,
        strategies=ALL_STRATEGIES,
    )
