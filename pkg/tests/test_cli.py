import json
import math

import pytest

from nanores import __version__
from nanores.harness.main import build_parser, run

DESK_CONFIG = """\
reservoir:
  t: 64
  assembly:
    n_wires: 80
    substrate_side: 120.0
    seed: 3
classifier:
  max_iter: 300
runtime:
  threads: 1
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "desk.yaml"
    path.write_text(DESK_CONFIG)
    return path


@pytest.fixture
def synth_corpus(tmp_path, config_file):
    root = tmp_path / "corpus"
    code = run(
        ["synth", "--config", str(config_file), "--out", str(root), "--speakers", "jackson", "--trials", "4"]
    )
    assert code == 0
    return root


@pytest.mark.unit
class TestParser:
    def test_version(self, capsys):
        with pytest.raises(SystemExit) as info:
            build_parser().parse_args(["--version"])
        assert info.value.code == 0
        assert __version__ in capsys.readouterr().out

    def test_usage_error_exits_2(self):
        with pytest.raises(SystemExit) as info:
            run(["simulate"])
        assert info.value.code == 2

    def test_unknown_override_exits_2(self, tmp_path):
        assert run(["netgen", "--out", str(tmp_path), "--set", "reservoir.wires=10"]) == 2

    def test_malformed_override_exits_2(self, tmp_path):
        assert run(["netgen", "--out", str(tmp_path), "--set", "reservoir.t"]) == 2

    def test_invalid_config_exits_2(self, tmp_path, config_file):
        assert run(["netgen", "--config", str(config_file), "--set", "reservoir.t=0"]) == 2

    def test_missing_manifest_exits_1(self, tmp_path, config_file):
        code = run(["distance", "--config", str(config_file), "--manifest", str(tmp_path / "nope.json")])
        assert code == 1


@pytest.mark.integration
class TestCommands:
    def test_synth_writes_manifest(self, synth_corpus):
        manifest = json.loads((synth_corpus / "manifest.json").read_text())
        assert len(manifest) == 40
        assert manifest[0]["speaker"] == "jackson"

    def test_manifest_and_netgen(self, tmp_path, config_file, synth_corpus, capsys):
        target = tmp_path / "m.json"
        assert run(["manifest", "--root", str(synth_corpus), "--out", str(target)]) == 0
        assert json.loads(capsys.readouterr().out)["entries"] == 40

        out = tmp_path / "net"
        assert run(["netgen", "--config", str(config_file), "--out", str(out), "--seed", "5"]) == 0
        topology = json.loads((out / "topology.json").read_text())
        assert len(topology["wires"]) == 80
        assert topology["seed"] >= 5

    def test_netgen_flags_and_file_target(self, tmp_path, capsys):
        target = tmp_path / "topo.json"
        args = ["netgen", "--wires", "60", "--mean-len", "30", "--std-len", "5", "--seed", "2"]
        assert run(args + ["--set", "reservoir.assembly.substrate_side=80", "--out", str(target)]) == 0
        assert json.loads(capsys.readouterr().out)["topology"] == str(target)
        topology = json.loads(target.read_text())
        assert len(topology["wires"]) == 60
        assert topology["substrate_side"] == 80.0
        lengths = [math.hypot(w["x2"] - w["x1"], w["y2"] - w["y1"]) for w in topology["wires"]]
        assert 27.0 < sum(lengths) / len(lengths) < 33.0

    def test_netgen_flags_are_validated(self, tmp_path):
        assert run(["netgen", "--wires", "1", "--out", str(tmp_path / "topo.json")]) == 2

    def test_simulate_csv_and_solve_dump(self, tmp_path, config_file, synth_corpus):
        out = tmp_path / "sim"
        code = run(
            [
                "simulate",
                "--config", str(config_file),
                "--manifest", str(synth_corpus / "manifest.json"),
                "--out", str(out),
                "--format", "csv",
                "--dump-solve", "3",
            ]
        )
        assert code == 0
        assert len(list(out.glob("*_jackson_*.csv"))) == 40
        dump = json.loads((out / "solve_dump.json").read_text())
        assert dump["timestep"] == 3 and dump["clip_ref"] == ["jackson", 0, 0]
        assert dump["g_eff"] > 0.0

    def test_simulate_reports_failures(self, tmp_path, config_file, synth_corpus):
        manifest = json.loads((synth_corpus / "manifest.json").read_text())
        bad = tmp_path / "5_jackson_9.wav"
        bad.write_bytes(b"RIFF")
        manifest.append({"path": str(bad), "speaker": "jackson", "digit": 5, "trial": 9})
        path = tmp_path / "with_bad.json"
        path.write_text(json.dumps(manifest))

        out = tmp_path / "sim"
        code = run(["simulate", "--config", str(config_file), "--manifest", str(path), "--out", str(out)])
        assert code == 1
        failures = json.loads((out / "failures.json").read_text())
        assert failures[0]["clip_ref"] == ["jackson", 5, 9]
        assert (out / "index.json").exists()

    def test_distance(self, tmp_path, config_file, synth_corpus):
        out = tmp_path / "dist"
        args = ["distance", "--config", str(config_file), "--manifest", str(synth_corpus / "manifest.json")]
        assert run(args + ["--out", str(out)]) == 0
        assert (out / "fig2_matrix.csv").exists()
        summary = json.loads((out / "run_summary.json").read_text())
        assert summary["task"] == "distance"
        assert summary["results"]["digits"] == list(range(10))

    def test_sweep(self, tmp_path, config_file, synth_corpus):
        out = tmp_path / "sweep"
        code = run(
            [
                "sweep",
                "--config", str(config_file),
                "--manifest", str(synth_corpus / "manifest.json"),
                "--set", "tasks.sweep.clip_speaker=jackson",
                "--grid", "0.0001,0.5",
                "--out", str(out),
            ]
        )
        assert code == 0
        assert (out / "fig3_sweep_kp.csv").read_text().startswith("timestep,k_p=0.0001,k_p=0.5")


@pytest.mark.integration
@pytest.mark.slow
class TestPipeline:
    def _pipeline(self, tmp_path, config_file, synth_corpus):
        manifest = str(synth_corpus / "manifest.json")
        common = ["--config", str(config_file), "--seed", "7"]
        sim, model_dir, eval_dir = tmp_path / "sim", tmp_path / "model", tmp_path / "eval"
        assert run(["simulate", *common, "--manifest", manifest, "--out", str(sim)]) == 0
        assert (
            run(
                [
                    "train", *common,
                    "--manifest", manifest,
                    "--traces", str(sim),
                    "--source", "hybrid",
                    "--subset", "32",
                    "--set", "split.test_fraction=0.25",
                    "--out", str(model_dir),
                ]
            )
            == 0
        )
        assert (
            run(
                [
                    "eval", *common,
                    "--manifest", manifest,
                    "--traces", str(sim),
                    "--model", str(model_dir / "model.json"),
                    "--split", str(model_dir / "split.json"),
                    "--out", str(eval_dir),
                ]
            )
            == 0
        )
        return eval_dir

    def test_same_seed_gives_identical_summary(self, tmp_path, config_file, synth_corpus):
        eval_dir = self._pipeline(tmp_path, config_file, synth_corpus)
        first = (eval_dir / "run_summary.json").read_bytes()
        self._pipeline(tmp_path, config_file, synth_corpus)
        assert (eval_dir / "run_summary.json").read_bytes() == first

        report = json.loads((eval_dir / "eval_report.json").read_text())
        assert 0.0 <= report["accuracy"] <= 1.0
        assert sum(map(sum, report["confusion"])) == 10
        assert report["train_time"] > 0.0
        assert (eval_dir / "confusion.csv").read_text().startswith("source,true,pred_0")

    def test_tasks_from_a_trace_pack(self, tmp_path, config_file, synth_corpus):
        manifest = str(synth_corpus / "manifest.json")
        sim = tmp_path / "sim"
        assert run(["simulate", "--config", str(config_file), "--manifest", manifest, "--out", str(sim)]) == 0
        overrides = [
            "--set", "tasks.reduced_class.speaker=jackson",
            "--set", "tasks.reduced_class.class_counts=[2]",
            "--set", "tasks.reduced_class.combinations=3",
            "--set", "tasks.ten_class.datasets={jackson: [jackson]}",
            "--set", "tasks.ten_class.classifiers=[LR]",
            "--set", "tasks.subsample_bench.subset_sizes=[4, 32]",
            "--set", "tasks.subsample_bench.repetitions=1",
            "--set", "split.test_fraction=0.25",
        ]
        tasks = (
            ("reduced", "table1.csv"),
            ("tenclass", "fig4_confusion_jackson_LR.csv"),
            ("bench", "fig5_curve.csv"),
        )
        for command, artifact in tasks:
            out = tmp_path / command
            args = [command, "--config", str(config_file), "--manifest", manifest, "--traces", str(sim)]
            assert run(args + overrides + ["--out", str(out)]) == 0
            assert (out / artifact).exists()
            assert json.loads((out / "run_summary.json").read_text())["results"]
