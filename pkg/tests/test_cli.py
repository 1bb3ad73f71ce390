import json
import os

import numpy as np
import pytest

from spiderlab.cli import main
from spiderlab.config import ConfigError, load_run_config


SMALL_SEARCH_CONFIG = """\
[run]
seed = 2100

[subjects]
n_subjects = 4

[experiment]
budget = 10
repetitions = 2
agents = rl_zero,random_walk
"""

SMALL_SESSION_CONFIG = """\
[run]
seed = 2100

[subjects]
n_subjects = 4
noise_sigma = 0.5
"""


@pytest.fixture
def search_config(tmp_path):
    path = tmp_path / "search.cfg"
    path.write_text(SMALL_SEARCH_CONFIG)
    return path


@pytest.fixture
def session_config(tmp_path):
    path = tmp_path / "session.cfg"
    path.write_text(SMALL_SESSION_CONFIG)
    return path


def read_tree(root):
    out = {}
    for dirpath, _, files in os.walk(root):
        for name in files:
            p = os.path.join(dirpath, name)
            out[os.path.relpath(p, root)] = open(p, "rb").read()
    return out


class TestConfig:
    def test_defaults_loaded(self, search_config):
        cfg = load_run_config(search_config)
        assert cfg.master_seed == 2100
        assert cfg.population.n_subjects == 4
        assert cfg.agent.epsilon == 0.05
        assert cfg.experiment.budget == 10
        assert cfg.protocol.low_target == 3 and cfg.protocol.high_target == 7

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_run_config(tmp_path / "nope.cfg")

    def test_missing_seed_names_key(self, tmp_path, monkeypatch):
        monkeypatch.delenv("EDPCGRL_SEED", raising=False)
        path = tmp_path / "c.cfg"
        path.write_text("[subjects]\nn_subjects = 3\n")
        with pytest.raises(ConfigError, match="run.seed"):
            load_run_config(path)

    def test_env_seed_override(self, search_config, monkeypatch):
        monkeypatch.setenv("EDPCGRL_SEED", "999")
        assert load_run_config(search_config).master_seed == 999

    def test_bad_values_named(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("[run]\nseed = 1\n\n[experiment]\ncategories = low:1\n")
        with pytest.raises(ConfigError, match="categories"):
            load_run_config(path)

    def test_impact_keys_respected(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text(
            "[run]\nseed = 1\n\n[subjects]\nimpact.locomotion.mean = 9.5\n"
            "impact.color.std = 0.01\n"
        )
        cfg = load_run_config(path)
        assert cfg.population.impact_means[0] == 9.5
        assert cfg.population.impact_stds[5] == 0.01


class TestSimulate:
    def test_search_outputs_and_determinism(self, search_config, tmp_path):
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert main(["simulate", "search", "--config", str(search_config),
                     "--out", str(out1)]) == 0
        assert main(["simulate", "search", "--config", str(search_config),
                     "--out", str(out2)]) == 0
        tree1, tree2 = read_tree(out1), read_tree(out2)
        assert set(tree1) == {"search_results.csv", "population.csv", "manifest.json"}
        assert tree1 == tree2  # byte identical

    def test_search_csv_has_row_per_cell(self, search_config, tmp_path):
        out = tmp_path / "o"
        main(["simulate", "search", "--config", str(search_config), "--out", str(out)])
        lines = (out / "search_results.csv").read_text().splitlines()
        assert len(lines) == 1 + 2 * 3 * 3  # agents x categories x initial states

    def test_missing_config_exits_two(self, tmp_path, capsys):
        code = main(["simulate", "search", "--config", str(tmp_path / "no.cfg"),
                     "--out", str(tmp_path / "o")])
        assert code == 2
        assert "no.cfg" in capsys.readouterr().err

    def test_session_traces_written(self, session_config, tmp_path):
        out = tmp_path / "o"
        assert main(["simulate", "session", "--config", str(session_config),
                     "--out", str(out)]) == 0
        traces = sorted(os.listdir(out / "traces"))
        assert traces == [
            "trace_s000_rl.csv", "trace_s000_rules.csv",
            "trace_s001_rl.csv", "trace_s001_rules.csv",
            "trace_s002_rl.csv", "trace_s002_rules.csv",
            "trace_s003_rl.csv", "trace_s003_rules.csv",
        ]
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 2100
        assert "traces/trace_s000_rl.csv" in manifest["outputs"]

    def test_session_determinism(self, session_config, tmp_path):
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        main(["simulate", "session", "--config", str(session_config), "--out", str(out1)])
        main(["simulate", "session", "--config", str(session_config), "--out", str(out2)])
        assert read_tree(out1) == read_tree(out2)

    def test_reversed_starts_from_all_max(self, session_config, tmp_path):
        out = tmp_path / "o"
        assert main(["simulate", "reversed", "--config", str(session_config),
                     "--out", str(out)]) == 0
        first_lines = (out / "traces" / "trace_s000_rl.csv").read_text().splitlines()
        boundary = first_lines[2].split(",")
        assert boundary[3] == "485"


class TestAnalyzeAndCluster:
    @pytest.fixture
    def trace_dir(self, session_config, tmp_path):
        out = tmp_path / "sim"
        main(["simulate", "session", "--config", str(session_config), "--out", str(out)])
        return out / "traces"

    def test_analyze_outputs(self, trace_dir, tmp_path):
        out = tmp_path / "analysis"
        assert main(["analyze", "session", "--traces", str(trace_dir),
                     "--out", str(out)]) == 0
        names = set(os.listdir(out))
        assert {"report.csv", "aggregate.csv", "max_anxiety.csv",
                "session_timeline.png", "mse_comparison.png", "manifest.json"} <= names
        report_lines = (out / "report.csv").read_text().splitlines()
        assert len(report_lines) == 1 + 8  # 4 subjects x 2 agents
        max_lines = (out / "max_anxiety.csv").read_text().splitlines()
        assert max_lines[0] == "subject,loc,aom,close,large,hair,color,anxiety"
        assert len(max_lines) == 1 + 4

    def test_analyze_no_figures(self, trace_dir, tmp_path):
        out = tmp_path / "analysis"
        main(["analyze", "session", "--traces", str(trace_dir), "--out", str(out),
              "--no-figures"])
        assert "session_timeline.png" not in os.listdir(out)

    def test_analyze_missing_dir_fails(self, tmp_path, capsys):
        code = main(["analyze", "session", "--traces", str(tmp_path / "none"),
                     "--out", str(tmp_path / "o")])
        assert code == 1

    def test_cluster_auto_and_forced(self, tmp_path):
        rng = np.random.default_rng(0)
        rows = ["subject,loc,aom,close,large,hair,color"]
        centers = [(0, 0, 0, 0, 0, 0), (2, 2, 2, 0, 0, 0), (0, 0, 2, 2, 1, 2)]
        i = 0
        for c in centers:
            for _ in range(8):
                jitter = rng.normal(0, 0.05, 6)
                rows.append(
                    f"s{i}," + ",".join(repr(float(v + j)) for v, j in zip(c, jitter))
                )
                i += 1
        infile = tmp_path / "max_anxiety.csv"
        infile.write_text("\n".join(rows) + "\n")

        out = tmp_path / "cl"
        assert main(["cluster", "spiders", "--in", str(infile), "--k", "auto",
                     "--k-range", "1:8", "--out", str(out)]) == 0
        centers_lines = (out / "cluster_centers.csv").read_text().splitlines()
        assert len(centers_lines) == 1 + 3  # elbow found 3
        assert (out / "elbow.png").exists()
        assignments = (out / "cluster_assignments.csv").read_text().splitlines()
        assert len(assignments) == 1 + 24

        out2 = tmp_path / "cl8"
        assert main(["cluster", "spiders", "--in", str(infile), "--k", "5",
                     "--k-range", "1:8", "--out", str(out2)]) == 0
        assert len((out2 / "cluster_centers.csv").read_text().splitlines()) == 1 + 5

    def test_cluster_missing_columns(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        assert main(["cluster", "spiders", "--in", str(bad),
                     "--out", str(tmp_path / "o")]) == 2


def synth_signal_csv(path, fs, duration, fn):
    t = np.arange(int(fs * duration)) / fs
    with open(path, "w") as fh:
        fh.write("t_s,value\n")
        for ti, v in zip(t, fn(t)):
            fh.write(f"{float(ti)!r},{float(v)!r}\n")


class TestProcess:
    def test_eda_pipeline(self, tmp_path):
        infile = tmp_path / "eda.csv"

        def eda(t):
            drift = 2.0 + 0.005 * t
            bumps = sum(
                0.5 * np.exp(-0.5 * ((t - c) / 1.0) ** 2) for c in (150, 200, 250)
            )
            return drift + bumps

        synth_signal_csv(infile, fs=20.0, duration=300, fn=eda)
        out = tmp_path / "o"
        assert main(["process", "eda", "--in", str(infile), "--relax-window", "0:120",
                     "--out", str(out)]) == 0
        names = set(os.listdir(out))
        assert {"eda_series.csv", "eda_features.csv", "eda_decomposition.png",
                "manifest.json"} <= names
        lines = (out / "eda_features.csv").read_text().splitlines()
        assert lines[0].startswith("# method=median")
        header = lines[1].split(",")
        row = lines[2].split(",")
        assert int(row[header.index("n_peaks")]) == 3

    def test_eda_per_segment_features(self, tmp_path):
        infile = tmp_path / "eda.csv"
        synth_signal_csv(infile, fs=20.0, duration=300,
                         fn=lambda t: 2.0 + 0.003 * t)
        out = tmp_path / "o"
        assert main(["process", "eda", "--in", str(infile), "--segment-s", "100",
                     "--out", str(out)]) == 0
        lines = (out / "eda_features.csv").read_text().splitlines()
        assert len(lines) == 2 + 3  # params comment + header + 3 segments
        starts = [float(line.split(",")[1]) for line in lines[2:]]
        assert starts == [0.0, 100.0, 200.0]

    def test_ppg_pipeline_seven_windows(self, tmp_path):
        infile = tmp_path / "ppg.csv"

        def ppg(t):
            x = np.zeros_like(t)
            for bt in np.arange(0.8, t[-1], 0.8):
                x += np.exp(-0.5 * ((t - bt) / 0.06) ** 2)
            return x

        synth_signal_csv(infile, fs=50.0, duration=420, fn=ppg)
        out = tmp_path / "o"
        assert main(["process", "ppg", "--in", str(infile), "--out", str(out)]) == 0
        lines = (out / "ppg_features.csv").read_text().splitlines()
        assert len(lines) == 2 + 7  # params comment + header + 7 windows
        assert (out / "ppg_summary.png").exists()

    def test_malformed_signal_names_line(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("t_s,value\n0.0,1.0\n0.1,zzz\n")
        code = main(["process", "eda", "--in", str(bad), "--out", str(tmp_path / "o")])
        assert code == 1
        assert "line 3" in capsys.readouterr().err

    def test_jittered_signal_rejected(self, tmp_path, capsys):
        bad = tmp_path / "jitter.csv"
        bad.write_text("t_s,value\n" + "".join(
            f"{t},1.0\n" for t in [0.0, 1.0, 2.0, 3.5, 4.0, 5.0, 6.0]
        ))
        code = main(["process", "eda", "--in", str(bad), "--out", str(tmp_path / "o")])
        assert code == 1
        assert "jitter" in capsys.readouterr().err

    def test_failed_run_leaves_no_partial_output(self, tmp_path):
        infile = tmp_path / "eda.csv"
        synth_signal_csv(infile, fs=20.0, duration=300, fn=lambda t: 2 + 0.001 * t)
        out = tmp_path / "o"
        # relax window beyond the recording: config error after out dir created
        code = main(["process", "eda", "--in", str(infile),
                     "--relax-window", "500:600", "--out", str(out)])
        assert code == 2
        assert not any(os.scandir(out))


class TestUsage:
    def test_help_exits_zero(self):
        assert main(["--help"]) == 0

    def test_unknown_command_exits_two(self):
        assert main(["flybynight"]) == 2
