"""Command-line front end.

Five subcommands: ``simulate`` writes a synthetic cohort to disk, ``evaluate``
runs the cross-validated benchmark over recorded data, ``fit`` trains a
deployable model bundle, ``serve`` hosts a bundle over HTTP, and ``session``
drives a live assessment against a running service from the terminal.  The
first three work on files; the last is a thin HTTP client with no model code
of its own.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path
from typing import IO, Iterator

import httpx

from .bundle import fit_bundle, save_bundle
from .embeddings import load_embeddings, save_embeddings
from .errors import AdaptestError
from .evaluation import run_benchmark
from .items import ItemBank
from .pipeline import ALL_STRATEGIES, DEFAULT_STRATEGIES
from .records import (
    Dataset,
    load_measures,
    load_responses,
    save_measures,
    save_responses,
    tokenize,
)
from .synthetic import SyntheticCohortSpec, simulate_language_cohort

ENV_BUNDLE = "ADAPTEST_BUNDLE"
ENV_PORT = "ADAPTEST_PORT"
DEFAULT_PORT = 8000
DEFAULT_TTL = 3600.0


def _parse_theta0(text: str) -> str | float:
    if text == "train_mean":
        return "train_mean"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"theta0 must be a number or 'train_mean', got {text!r}"
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptest",
        description="Adaptive assessment engine: train, benchmark, serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a synthetic cohort to a directory")
    p.add_argument("--n", type=int, default=900, help="number of respondents")
    p.add_argument("--items", type=int, default=11, help="number of questions J")
    p.add_argument("--levels", type=int, default=8, help="graded levels K")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--embed-dim", type=int, default=10)
    p.add_argument("--embed-noise", type=float, default=1.0)
    p.add_argument("--measure-noise", type=float, default=1.0)
    p.add_argument("--measure", default="synthetic", help="measure column name")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("evaluate", help="run the 9-fold benchmark on recorded data")
    _add_dataset_args(p)
    p.add_argument("--K", type=int, default=8, help="graded levels")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument(
        "--strategies", nargs="+", choices=ALL_STRATEGIES, default=list(DEFAULT_STRATEGIES)
    )
    p.add_argument(
        "--scorings", nargs="+", choices=["latent", "ctt"], default=["latent", "ctt"]
    )
    p.add_argument("--max-items", type=int, default=None)
    p.add_argument("--theta0", type=_parse_theta0, default=0.0)
    p.add_argument("--quiet", action="store_true", help="suppress progress lines")
    p.add_argument("--out", required=True, help="report output directory")
    p.set_defaults(handler=_cmd_evaluate)

    p = sub.add_parser("fit", help="train a deployable model bundle")
    _add_dataset_args(p)
    p.add_argument("--K", type=int, default=8)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument(
        "--strategies", nargs="+", choices=ALL_STRATEGIES, default=list(DEFAULT_STRATEGIES)
    )
    p.add_argument("--rotation", type=int, default=0, help="which fold rotation to train on")
    p.add_argument("--max-items", type=int, default=5)
    p.add_argument("--theta0", type=_parse_theta0, default=0.0)
    p.add_argument(
        "--score-exposure", choices=["trajectory", "final_only"], default="trajectory"
    )
    p.add_argument("--out", required=True, help="bundle json path")
    p.set_defaults(handler=_cmd_fit)

    p = sub.add_parser("serve", help="host a fitted bundle over HTTP")
    p.add_argument("--bundle", default=None, help=f"bundle path (or ${ENV_BUNDLE})")
    p.add_argument("--port", type=int, default=None, help=f"tcp port (or ${ENV_PORT})")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--session-ttl", type=float, default=DEFAULT_TTL, help="idle seconds")
    p.add_argument("--transcript-dir", default=None, help="append jsonl transcripts here")
    p.set_defaults(handler=_cmd_serve)

    p = sub.add_parser("session", help="take an assessment against a running service")
    p.add_argument("--url", required=True, help="service base url")
    p.add_argument("--strategy", required=True)
    p.add_argument("--scoring", choices=["latent", "ctt", "both"], default="both")
    p.add_argument("--max-items", type=int, default=None)
    p.set_defaults(handler=_cmd_session)

    return parser


def _add_dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--responses", required=True, help="responses csv")
    p.add_argument("--measures", required=True, help="measures csv")
    p.add_argument("--items", required=True, help="item bank json")
    p.add_argument("--embeddings", required=True, help="word-vector csv")
    p.add_argument("--measure", default=None, help="measure name when the csv has several")


def _load_dataset(args) -> tuple[Dataset, "EmbeddingModel"]:
    with open(args.items) as fh:
        bank = ItemBank.from_json(json.load(fh))
    records = load_responses(args.responses, bank)
    measures = load_measures(args.measures, args.measure)
    embeddings = load_embeddings(args.embeddings)
    return Dataset(bank, records, measures), embeddings


def _cmd_simulate(args) -> int:
    spec = SyntheticCohortSpec(
        n=args.n,
        J=args.items,
        K=args.levels,
        seed=args.seed,
        embed_dim=args.embed_dim,
        embed_noise=args.embed_noise,
        measure_noise=args.measure_noise,
    )
    dataset, embeddings, thetas = simulate_language_cohort(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_responses(out / "responses.csv", dataset.records)
    save_measures(out / "measures.csv", dataset.measures, args.measure)
    save_embeddings(out / "embeddings.csv", embeddings)
    with open(out / "items.json", "w") as fh:
        json.dump(dataset.items.to_json(), fh, indent=2)
        fh.write("\n")
    with open(out / "thetas.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["respondent_id", "theta"])
        for rid, theta in zip(dataset.respondent_ids, thetas):
            writer.writerow([rid, repr(float(theta))])
    print(f"wrote cohort of {args.n} respondents to {out}")
    return 0


def _cmd_evaluate(args) -> int:
    dataset, embeddings = _load_dataset(args)
    progress = None if args.quiet else lambda msg: print(msg, file=sys.stderr)
    result = run_benchmark(
        dataset,
        embeddings,
        K=args.K,
        seed=args.seed,
        strategies=tuple(args.strategies),
        scorings=tuple(args.scorings),
        max_items=args.max_items,
        theta0=args.theta0,
        measure=args.measure,
        progress=progress,
    )
    result.write(args.out)
    print(f"wrote report.json, report.txt, predictions.csv to {args.out}")
    return 0


def _cmd_fit(args) -> int:
    dataset, embeddings = _load_dataset(args)
    bundle = fit_bundle(
        dataset,
        embeddings,
        K=args.K,
        seed=args.seed,
        strategies=tuple(args.strategies),
        rotation=args.rotation,
        measure=args.measure,
        max_items=args.max_items,
        theta0=args.theta0,
        score_exposure=args.score_exposure,
    )
    save_bundle(bundle, args.out)
    print(f"wrote bundle to {args.out}")
    return 0


def resolve_serve_config(args, env: dict[str, str]) -> tuple[str, int]:
    """Flag beats environment beats default; the bundle path is mandatory."""
    bundle = args.bundle if args.bundle is not None else env.get(ENV_BUNDLE)
    if not bundle:
        raise ValueError(f"pass --bundle or set ${ENV_BUNDLE}")
    if args.port is not None:
        port = args.port
    elif ENV_PORT in env:
        try:
            port = int(env[ENV_PORT])
        except ValueError:
            raise ValueError(
                f"${ENV_PORT} must be an integer, got {env[ENV_PORT]!r}"
            ) from None
    else:
        port = DEFAULT_PORT
    return bundle, port


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app_from_bundle

    try:
        bundle, port = resolve_serve_config(args, dict(os.environ))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    app = create_app_from_bundle(
        bundle, session_ttl=args.session_ttl, transcript_dir=args.transcript_dir
    )
    print(f"serving {bundle} on {args.host}:{port}", file=sys.stderr)
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def _format_estimates(estimates: dict) -> str:
    parts = []
    if "theta" in estimates:
        parts.append(f"latent score {estimates['theta']:+.3f}")
    if "yhat" in estimates:
        parts.append(f"predicted measure {estimates['yhat']:.2f}")
    return ", ".join(parts) if parts else "no estimates exposed"


def run_session(
    client: httpx.Client,
    *,
    strategy: str,
    scoring: str = "both",
    max_items: int | None = None,
    lines: Iterator[str] | None = None,
    out: IO[str] = sys.stdout,
) -> int:
    """Drive one assessment to completion over HTTP, reading answers line by
    line.  Words the model has never seen get the question re-asked, matching
    the service contract."""
    lines = iter(sys.stdin) if lines is None else iter(lines)
    payload: dict = {"strategy": strategy, "scoring": scoring}
    if max_items is not None:
        payload["max_items"] = max_items
    res = client.post("/api/sessions", json=payload)
    if res.status_code != 201:
        body = res.json()
        print(f"error ({body['code']}): {body['message']}", file=out)
        return 1
    body = res.json()
    session_id, question = body["session_id"], body["question"]
    print(f"session {session_id} started ({strategy}, scoring={scoring})", file=out)
    while question is not None:
        print(f"\n[{question['item_id']}] {question['text']}", file=out)
        min_words = question["min_words"]
        line = next(lines, None)
        if line is None:
            print("input ended before the session finished", file=out)
            return 1
        words = list(tokenize(line))
        if len(words) < min_words:
            print(f"please answer with at least {min_words} word(s)", file=out)
            continue
        res = client.post(
            f"/api/sessions/{session_id}/responses",
            json={"item_id": question["item_id"], "words": words},
        )
        if res.status_code == 422:
            print("none of those words are recognized — try different ones", file=out)
            continue
        if res.status_code != 200:
            body = res.json()
            print(f"error ({body['code']}): {body['message']}", file=out)
            return 1
        body = res.json()
        print(f"step {body['step']}: {_format_estimates(body['estimates'])}", file=out)
        question = body["question"]
    print(f"\ndone: {_format_estimates(body['estimates'])}", file=out)
    return 0


def _cmd_session(args) -> int:
    with httpx.Client(base_url=args.url.rstrip("/"), timeout=30.0) as client:
        return run_session(
            client,
            strategy=args.strategy,
            scoring=args.scoring,
            max_items=args.max_items,
        )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except AdaptestError as exc:
        print(f"error ({exc.code}): {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
