"""Command-line front-end tests: file round trips, flag precedence, and the
interactive session client driven against an in-process service."""

import io
import json
import re

import pytest
from fastapi.testclient import TestClient

from adaptest.bundle import bundle_to_pipeline, load_bundle
from adaptest.cli import (
    DEFAULT_PORT,
    build_parser,
    main,
    resolve_serve_config,
    run_session,
)
from adaptest.evaluation import load_prediction_log
from adaptest.items import ItemBank
from adaptest.records import Dataset, load_measures, load_responses
from adaptest.embeddings import load_embeddings
from adaptest.service import create_app


@pytest.fixture(scope="module")
def cohort_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("cohort")
    code = main(
        [
            "simulate",
            "--n", "72",
            "--items", "3",
            "--levels", "3",
            "--seed", "5",
            "--embed-dim", "5",
            "--out", str(out),
        ]
    )
    assert code == 0
    return out


def dataset_flags(cohort_dir):
    return [
        "--responses", str(cohort_dir / "responses.csv"),
        "--measures", str(cohort_dir / "measures.csv"),
        "--items", str(cohort_dir / "items.json"),
        "--embeddings", str(cohort_dir / "embeddings.csv"),
    ]


class TestParser:
    def test_subcommands_exist(self):
        parser = build_parser()
        actions = parser._subparsers._group_actions[0].choices
        assert set(actions) == {"simulate", "evaluate", "fit", "serve", "session"}

    def test_unknown_strategy_rejected(self, capsys):
        with pytest.raises(SystemExit):
            build_parser().parse_args(
                ["evaluate", "--responses", "r", "--measures", "m", "--items", "i",
                 "--embeddings", "e", "--seed", "1", "--strategies", "foo", "--out", "o"]
            )
        assert "invalid choice" in capsys.readouterr().err

    def test_theta0_accepts_number_and_keyword(self):
        parser = build_parser()
        base = ["fit", "--responses", "r", "--measures", "m", "--items", "i",
                "--embeddings", "e", "--seed", "1", "--out", "o"]
        assert parser.parse_args(base + ["--theta0", "0.5"]).theta0 == 0.5
        assert parser.parse_args(base + ["--theta0", "train_mean"]).theta0 == "train_mean"
        with pytest.raises(SystemExit):
            parser.parse_args(base + ["--theta0", "sideways"])


class TestSimulate:
    def test_writes_loadable_cohort(self, cohort_dir):
        with open(cohort_dir / "items.json") as fh:
            bank = ItemBank.from_json(json.load(fh))
        assert bank.J == 3
        records = load_responses(cohort_dir / "responses.csv", bank)
        measures = load_measures(cohort_dir / "measures.csv")
        dataset = Dataset(bank, records, measures)
        assert len(dataset.records) == 72
        assert all(0.0 <= v <= 27.0 for v in measures.values())
        embeddings = load_embeddings(cohort_dir / "embeddings.csv")
        assert embeddings.d == 5

    def test_thetas_align_with_respondents(self, cohort_dir):
        lines = (cohort_dir / "thetas.csv").read_text().splitlines()
        assert lines[0] == "respondent_id,theta"
        assert len(lines) == 73

    def test_same_seed_same_bytes(self, cohort_dir, tmp_path):
        again = tmp_path / "again"
        main(["simulate", "--n", "72", "--items", "3", "--levels", "3",
              "--seed", "5", "--embed-dim", "5", "--out", str(again)])
        for name in ("responses.csv", "measures.csv", "embeddings.csv",
                     "items.json", "thetas.csv"):
            assert (again / name).read_bytes() == (cohort_dir / name).read_bytes()


class TestEvaluate:
    def test_writes_report_files(self, cohort_dir, tmp_path, capsys):
        out = tmp_path / "report"
        code = main(
            ["evaluate", *dataset_flags(cohort_dir), "--K", "3", "--seed", "11",
             "--strategies", "alirt", "--scorings", "latent",
             "--max-items", "2", "--quiet", "--out", str(out)]
        )
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["config"]["K"] == 3
        assert report["config"]["seed"] == 11
        assert report["config"]["strategies"] == ["alirt"]
        rows = load_prediction_log(out / "predictions.csv")
        assert len(rows) == 72 * 2  # respondents x steps, one strategy/scoring
        assert (out / "report.txt").read_text().strip()
        assert capsys.readouterr().err == ""  # --quiet suppresses progress

    def test_missing_file_exits_2(self, tmp_path, capsys):
        code = main(
            ["evaluate", "--responses", str(tmp_path / "nope.csv"),
             "--measures", "m", "--items", "i", "--embeddings", "e",
             "--seed", "1", "--out", str(tmp_path)]
        )
        assert code == 2
        assert "error" in capsys.readouterr().err


class TestFit:
    def test_writes_loadable_bundle(self, cohort_dir, tmp_path):
        path = tmp_path / "bundle.json"
        code = main(
            ["fit", *dataset_flags(cohort_dir), "--K", "3", "--seed", "11",
             "--strategies", "alirt", "random", "--max-items", "2",
             "--out", str(path)]
        )
        assert code == 0
        pipeline, config = bundle_to_pipeline(load_bundle(path))
        assert config["max_items"] == 2
        assert pipeline.K == 3
        assert set(pipeline.fixed_orders) <= {"forward", "backward"}


class TestServeConfig:
    def parse(self, argv):
        return build_parser().parse_args(["serve"] + argv)

    def test_flag_beats_env(self):
        args = self.parse(["--bundle", "flag.json", "--port", "9001"])
        env = {"ADAPTEST_BUNDLE": "env.json", "ADAPTEST_PORT": "9002"}
        assert resolve_serve_config(args, env) == ("flag.json", 9001)

    def test_env_beats_default(self):
        args = self.parse([])
        env = {"ADAPTEST_BUNDLE": "env.json", "ADAPTEST_PORT": "9002"}
        assert resolve_serve_config(args, env) == ("env.json", 9002)

    def test_default_port(self):
        args = self.parse(["--bundle", "b.json"])
        assert resolve_serve_config(args, {}) == ("b.json", DEFAULT_PORT)

    def test_missing_bundle_rejected(self):
        with pytest.raises(ValueError, match="bundle"):
            resolve_serve_config(self.parse([]), {})

    def test_non_integer_env_port_rejected(self):
        args = self.parse(["--bundle", "b.json"])
        with pytest.raises(ValueError, match="integer"):
            resolve_serve_config(args, {"ADAPTEST_PORT": "eighty"})


class TestSessionClient:
    @pytest.fixture()
    def client(self, small_pipeline):
        app = create_app(small_pipeline, {"max_items": 2})
        with TestClient(app) as client:
            yield client

    def answer_lines(self, small_cohort, rid_index):
        dataset, _ = small_cohort
        record = dataset.records[rid_index]
        # any in-vocabulary words satisfy any question, so feed responses in id order
        return [" ".join(record.words_for(item)) for item in (1, 2, 3, 4)]

    def test_full_session_to_done(self, client, small_cohort):
        out = io.StringIO()
        code = run_session(
            client, strategy="alirt", lines=self.answer_lines(small_cohort, 0), out=out
        )
        text = out.getvalue()
        assert code == 0
        assert "step 1" in text and "step 2" in text
        assert "done:" in text
        assert "latent score" in text and "predicted measure" in text

    def test_scoring_latent_hides_yhat(self, client, small_cohort):
        out = io.StringIO()
        run_session(client, strategy="alirt", scoring="latent",
                    lines=self.answer_lines(small_cohort, 1), out=out)
        assert "predicted measure" not in out.getvalue()

    def test_oov_answer_reasks_question(self, client, small_cohort):
        out = io.StringIO()
        lines = ["zzz-not-a-word", *self.answer_lines(small_cohort, 2)]
        code = run_session(client, strategy="alirt", lines=lines, out=out)
        text = out.getvalue()
        assert code == 0
        assert "none of those words are recognized" in text
        questions = re.findall(r"^\[\d+\]", text, flags=re.MULTILINE)
        assert len(questions) == 3  # two real steps plus the re-ask
        assert questions[0] == questions[1]

    def test_blank_answer_reprompts(self, client, small_cohort):
        out = io.StringIO()
        lines = ["   ", *self.answer_lines(small_cohort, 3)]
        code = run_session(client, strategy="alirt", lines=lines, out=out)
        assert code == 0
        assert "at least 1 word" in out.getvalue()

    def test_eof_mid_session_fails(self, client, small_cohort):
        out = io.StringIO()
        code = run_session(
            client, strategy="alirt", lines=self.answer_lines(small_cohort, 0)[:1], out=out
        )
        assert code == 1
        assert "input ended" in out.getvalue()

    def test_unknown_strategy_reports_error(self, client):
        out = io.StringIO()
        code = run_session(client, strategy="sideways", lines=[], out=out)
        assert code == 1
        assert "unknown_strategy" in out.getvalue()

    def test_max_items_override(self, client, small_cohort):
        out = io.StringIO()
        code = run_session(client, strategy="forward", max_items=1,
                           lines=self.answer_lines(small_cohort, 4), out=out)
        assert code == 0
        assert "step 2" not in out.getvalue()
