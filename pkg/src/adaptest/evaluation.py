"""Nine-fold cross-validated benchmark of selection strategies and scoring
paradigms, plus correlation metrics, factor-analysis diagnostics, the
level-count sweep, and report emission.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import gammaincc

from .embeddings import EmbeddingModel
from .errors import SingularCorrelation, ZeroVariance
from .pipeline import DEFAULT_STRATEGIES, FittedPipeline, fit_pipeline
from .records import Dataset
from .splits import N_FOLDS, make_splits
from .strategies import actor_critic_score, advance, ctt_score, initial_state

PREDICTION_COLUMNS = (
    "fold",
    "respondent_id",
    "strategy",
    "scoring",
    "step",
    "item_id",
    "prediction",
    "target_ctt",
    "target_latent",
)


def pearson_r(x: Iterable[float], y: Iterable[float]) -> float:
    """Sample correlation; both inputs need length ≥ 2 and spread."""
    x = np.asarray(list(x), dtype=float)
    y = np.asarray(list(y), dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be equal-length vectors")
    if len(x) < 2:
        raise ValueError("need at least two points")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(xc @ xc)
    sy = float(yc @ yc)
    if sx <= 0 or sy <= 0:
        raise ZeroVariance("correlation is undefined for a constant vector")
    return float(xc @ yc) / float(np.sqrt(sx * sy))


@dataclass(frozen=True)
class PredictionRow:
    """One scored step of one respondent's replayed session."""

    fold: int
    respondent_id: str
    strategy: str
    scoring: str
    step: int
    item_id: int
    prediction: float
    target_ctt: float
    target_latent: float


@dataclass
class BenchmarkResult:
    report: dict
    rows: list[PredictionRow] = field(repr=False)

    def write(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_report_json(self.report, out / "report.json")
        write_report_text(self.report, out / "report.txt")
        write_prediction_log(self.rows, out / "predictions.csv")


def _replay_sessions(
    pipeline: FittedPipeline,
    fold: int,
    test_ds: Dataset,
    strategies: Sequence[str],
    scorings: Sequence[str],
    max_items: int,
) -> list[PredictionRow]:
    rows: list[PredictionRow] = []
    ids = pipeline.item_ids
    policies = {s: pipeline.policy(s) for s in strategies}
    for rec in sorted(test_ds.records, key=lambda r: r.respondent_id):
        rid = rec.respondent_id
        scores = pipeline.full_scores(rec)
        levels = pipeline.levels_for(scores)
        target_latent = pipeline.latent_all(levels).theta
        target_ctt = test_ds.measures[rid]
        for strategy in strategies:
            state = initial_state(ids, theta0=pipeline.theta0)
            for step in range(1, max_items + 1):
                item = policies[strategy].next_item(state, rid)
                state = advance(pipeline.grm, state, item, levels[item], scores[item])
                for scoring in scorings:
                    if scoring == "latent":
                        prediction = state.theta.theta
                    elif strategy == "actor_critic":
                        prediction = actor_critic_score(pipeline.actor_critic, state)
                    else:
                        prediction = ctt_score(state)
                    rows.append(
                        PredictionRow(
                            fold=fold,
                            respondent_id=rid,
                            strategy=strategy,
                            scoring=scoring,
                            step=step,
                            item_id=item,
                            prediction=float(prediction),
                            target_ctt=float(target_ctt),
                            target_latent=float(target_latent),
                        )
                    )
    return rows


def _correlation_tables(rows: list[PredictionRow], strategies, scorings, max_items) -> dict:
    results: dict = {}
    by_key: dict[tuple, list[PredictionRow]] = {}
    for row in rows:
        by_key.setdefault((row.strategy, row.scoring, row.step), []).append(row)
    for strategy in strategies:
        results[strategy] = {}
        for scoring in scorings:
            per_scoring: dict = {"ctt": {}, "latent_all": {}}
            for step in range(1, max_items + 1):
                subset = by_key.get((strategy, scoring, step), [])
                preds = [r.prediction for r in subset]
                for outcome, attr in (("ctt", "target_ctt"), ("latent_all", "target_latent")):
                    targets = [getattr(r, attr) for r in subset]
                    pooled = pearson_r(preds, targets)
                    per_fold = []
                    for fold in range(N_FOLDS):
                        fp = [r.prediction for r in subset if r.fold == fold]
                        ft = [getattr(r, attr) for r in subset if r.fold == fold]
                        per_fold.append(pearson_r(fp, ft))
                    per_scoring[outcome][str(step)] = {
                        "pooled_r": pooled,
                        "r_squared": pooled**2,
                        "per_fold_r": per_fold,
                    }
            results[strategy][scoring] = per_scoring
    return results


def _selection_flow(rows: list[PredictionRow], strategies, first_scoring) -> dict:
    flow: dict = {s: {} for s in strategies}
    for row in rows:
        if row.scoring != first_scoring:
            continue
        per_step = flow[row.strategy].setdefault(str(row.step), {})
        key = str(row.item_id)
        per_step[key] = per_step.get(key, 0) + 1
    return flow


def run_benchmark(
    dataset: Dataset,
    embeddings: EmbeddingModel,
    *,
    K: int = 8,
    seed: int,
    strategies: Sequence[str] = DEFAULT_STRATEGIES,
    scorings: Sequence[str] = ("latent", "ctt"),
    max_items: int | None = None,
    theta0: str | float = 0.0,
    measure: str | None = None,
    progress: Callable[[str], None] | None = None,
) -> BenchmarkResult:
    """Nine rotations of (4 poly folds, 4 train folds, 1 test fold): fit the
    pipeline on the first two, replay every test respondent's recorded answers
    under each strategy, and score each step against both the observed measure
    and the all-items latent estimate.  Test predictions are pooled across
    rotations before correlating."""
    strategies = tuple(strategies)
    scorings = tuple(scorings)
    J = len(dataset.items)
    max_items = J if max_items is None else min(max_items, J)
    splits = make_splits(dataset.respondent_ids, seed)
    rows: list[PredictionRow] = []
    audit: dict = {}
    collapsed: dict = {}
    for split in splits:
        if progress:
            progress(f"fold {split.rotation}: fitting on {len(split.train_ids)} train / "
                     f"{len(split.poly_ids)} poly respondents")
        pipeline = fit_pipeline(
            dataset,
            embeddings,
            K=K,
            seed=seed,
            train_ids=split.train_ids,
            poly_ids=split.poly_ids,
            strategies=strategies,
            theta0=theta0,
        )
        test_ds = dataset.subset(set(split.test_ids))
        audit[str(split.rotation)] = {
            "n_train": pipeline.meta["n_train"],
            "n_poly": pipeline.meta["n_poly"],
            "n_test": len(test_ds.records),
            "train_test_overlap": len(set(pipeline.meta["train_ids"]) & split.test_ids),
            "poly_test_overlap": len(set(pipeline.meta["poly_ids"]) & split.test_ids),
            "train_poly_overlap": len(
                set(pipeline.meta["train_ids"]) & set(pipeline.meta["poly_ids"])
            ),
            "grm_converged": pipeline.meta["grm_converged"],
        }
        if pipeline.meta["collapsed_items"]:
            collapsed[str(split.rotation)] = pipeline.meta["collapsed_items"]
        rows.extend(
            _replay_sessions(pipeline, split.rotation, test_ds, strategies, scorings, max_items)
        )

    report = {
        "config": {
            "K": K,
            "seed": seed,
            "J": J,
            "n": len(dataset.records),
            "max_items": max_items,
            "strategies": list(strategies),
            "scorings": list(scorings),
            "measure": measure,
            "theta0": theta0 if isinstance(theta0, str) else float(theta0),
        },
        "results": _correlation_tables(rows, strategies, scorings, max_items),
        "selection_flow": _selection_flow(rows, strategies, scorings[0]),
        "audit": audit,
        "collapsed_levels": collapsed,
    }
    return BenchmarkResult(report=report, rows=rows)


# ---------------------------------------------------------------------------
# Level-count sweep


def discretization_sweep(
    dataset: Dataset,
    embeddings: EmbeddingModel,
    K_values: Sequence[int],
    *,
    seed: int,
    strategy: str = "alirt",
    scoring: str = "latent",
    max_items: int | None = None,
    progress: Callable[[str], None] | None = None,
) -> dict:
    """One benchmark run per level count K, sharing folds and seed; the curve
    per K is pooled r against the observed measure at each step."""
    J = len(dataset.items)
    max_items = J if max_items is None else min(max_items, J)
    curves: dict = {}
    collapsed: dict = {}
    for K in sorted(K_values):
        if progress:
            progress(f"sweep: K={K}")
        result = run_benchmark(
            dataset,
            embeddings,
            K=K,
            seed=seed,
            strategies=(strategy,),
            scorings=(scoring,),
            max_items=max_items,
            progress=progress,
        )
        table = result.report["results"][strategy][scoring]["ctt"]
        curves[str(K)] = [table[str(s)]["pooled_r"] for s in range(1, max_items + 1)]
        if result.report["collapsed_levels"]:
            collapsed[str(K)] = result.report["collapsed_levels"]
    return {
        "config": {
            "seed": seed,
            "strategy": strategy,
            "scoring": scoring,
            "max_items": max_items,
            "K_values": sorted(int(k) for k in K_values),
        },
        "curves": curves,
        "collapsed_levels": collapsed,
    }


# ---------------------------------------------------------------------------
# Factor-analysis diagnostics


def _correlation_matrix(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("need an n x J data matrix")
    n, J = X.shape
    if n <= J:
        raise ValueError(f"need more rows than columns, got {n} x {J}")
    sd = X.std(axis=0)
    if np.any(sd <= 0):
        raise SingularCorrelation("a constant column has no correlation structure")
    return np.corrcoef(X, rowvar=False)


def kmo(X: np.ndarray) -> float:
    """Sampling-adequacy index: squared correlations against squared
    anti-image partial correlations, summed off-diagonal."""
    R = _correlation_matrix(X)
    try:
        R_inv = np.linalg.inv(R)
    except np.linalg.LinAlgError:
        raise SingularCorrelation("correlation matrix is not invertible") from None
    d = np.sqrt(np.diag(R_inv))
    partial = -R_inv / np.outer(d, d)
    off = ~np.eye(R.shape[0], dtype=bool)
    r2 = float((R[off] ** 2).sum())
    p2 = float((partial[off] ** 2).sum())
    return r2 / (r2 + p2)


def bartlett_sphericity(X: np.ndarray) -> dict[str, float]:
    """Chi-square test that the correlation matrix is the identity.

    statistic = −(n − 1 − (2J + 5)/6) · ln det(R) with J(J−1)/2 degrees of
    freedom; the p-value is the regularized upper incomplete gamma tail.
    """
    X = np.asarray(X, dtype=float)
    n, J = X.shape
    R = _correlation_matrix(X)
    sign, logdet = np.linalg.slogdet(R)
    if sign <= 0:
        raise SingularCorrelation("correlation matrix has non-positive determinant")
    statistic = -(n - 1 - (2 * J + 5) / 6.0) * logdet
    df = J * (J - 1) / 2.0
    p_value = float(gammaincc(df / 2.0, statistic / 2.0))
    return {"statistic": float(statistic), "df": df, "p_value": p_value}


# ---------------------------------------------------------------------------
# Report emission


def write_report_json(report: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")


def write_prediction_log(rows: list[PredictionRow], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PREDICTION_COLUMNS)
        for r in rows:
            writer.writerow(
                [
                    r.fold,
                    r.respondent_id,
                    r.strategy,
                    r.scoring,
                    r.step,
                    r.item_id,
                    repr(r.prediction),
                    repr(r.target_ctt),
                    repr(r.target_latent),
                ]
            )


def load_prediction_log(path: str | Path) -> list[PredictionRow]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != PREDICTION_COLUMNS:
            raise ValueError(f"unexpected prediction log header: {header}")
        for rec in reader:
            rows.append(
                PredictionRow(
                    fold=int(rec[0]),
                    respondent_id=rec[1],
                    strategy=rec[2],
                    scoring=rec[3],
                    step=int(rec[4]),
                    item_id=int(rec[5]),
                    prediction=float(rec[6]),
                    target_ctt=float(rec[7]),
                    target_latent=float(rec[8]),
                )
            )
    return rows


def write_report_text(report: dict, path: str | Path) -> None:
    """Aligned text tables: one block per outcome, rows are strategy-scoring
    pairs, columns are step counts."""
    config = report["config"]
    max_items = config["max_items"]
    steps = list(range(1, max_items + 1))
    lines = [
        "Benchmark report",
        f"seed={config['seed']}  K={config['K']}  J={config['J']}  "
        f"n={config['n']}  max_items={max_items}",
        "",
    ]
    label_width = max(
        len(f"{s}-{sc}")
        for s in config["strategies"]
        for sc in config["scorings"]
    )
    label_width = max(label_width, len("strategy-scoring"))
    for outcome, title in (("ctt", "observed measure"), ("latent_all", "all-items latent score")):
        lines.append(f"Pearson r against {title} (by items administered)")
        header = "strategy-scoring".ljust(label_width) + "".join(
            f"{s:>8d}" for s in steps
        )
        lines.append(header)
        for strategy in config["strategies"]:
            for scoring in config["scorings"]:
                table = report["results"][strategy][scoring][outcome]
                cells = "".join(f"{table[str(s)]['pooled_r']:>8.3f}" for s in steps)
                lines.append(f"{strategy}-{scoring}".ljust(label_width) + cells)
        lines.append("")
    Path(path).write_text("\n".join(lines))
