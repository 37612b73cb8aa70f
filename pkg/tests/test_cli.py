import numpy as np

from gossipbet.cli import CSV_HEADER, main

QUICK = [
    "--set", "horizon=40",
    "--set", "n_agents=4",
    "--set", "dim=3",
    "--set", "topology=complete",
    "--set", "seed=2",
]


def read_csv(path):
    return (path / "metrics.csv").read_bytes()


def test_run_writes_csv_and_meta(tmp_path, capsys):
    out = tmp_path / "demo"
    assert main(["run", *QUICK, "--out", str(out)]) == 0
    text = (out / "metrics.csv").read_text()
    lines = text.strip().split("\n")
    assert lines[0] == CSV_HEADER
    assert len(lines) == 41
    meta = (out / "meta").read_text()
    assert "meta.rho = " in meta
    assert "learner = coin-func" in meta


def test_run_single_agent_disagreement_column_zero(tmp_path):
    out = tmp_path / "solo"
    rc = main(
        ["run", "--set", "horizon=25", "--set", "n_agents=1",
         "--set", "topology=isolated", "--set", "dim=3", "--out", str(out)]
    )
    assert rc == 0
    rows = (out / "metrics.csv").read_text().strip().split("\n")[1:]
    assert all(float(row.split(",")[5]) == 0.0 for row in rows)


def test_run_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", *QUICK, "--out", str(a)]) == 0
    assert main(["run", *QUICK, "--out", str(b)]) == 0
    assert read_csv(a) == read_csv(b)


def test_meta_closure_reproduces_run(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", *QUICK, "--out", str(a)]) == 0
    # the meta document is itself a valid config reproducing the run
    assert main(["run", "--config", str(a / "meta"), "--out", str(b)]) == 0
    assert read_csv(a) == read_csv(b)
    assert (a / "meta").read_bytes() == (b / "meta").read_bytes()


def test_csv_header_stable_across_learners(tmp_path):
    for learner, extra in (
        ("coin-wealth", []),
        ("dogd", ["--set", "eta0=1.0"]),
        ("oracle", []),
    ):
        out = tmp_path / learner
        rc = main(["run", *QUICK, "--set", f"learner={learner}", *extra, "--out", str(out)])
        assert rc == 0
        lines = (out / "metrics.csv").read_text().strip().split("\n")
        assert lines[0] == CSV_HEADER
        min_wealth_field = lines[1].split(",")[7]
        if learner == "dogd":
            assert min_wealth_field == ""  # absent fields emitted as empty
        else:
            assert float(min_wealth_field) > 0


def test_config_error_exit_code(tmp_path, capsys):
    assert main(["run", "--set", "learner=nope", "--out", str(tmp_path / "x")]) == 1
    assert "config error" in capsys.readouterr().err
    bad = tmp_path / "bad.cfg"
    bad.write_text("horizon 40\n")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "y")]) == 1


def test_io_error_exit_code(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    rc = main(["run", *QUICK, "--out", str(blocker / "sub")])
    assert rc == 3
    assert "i/o error" in capsys.readouterr().err


def test_out_root_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("GOSSIPBET_OUT", str(tmp_path / "env-root"))
    assert main(["run", *QUICK]) == 0
    assert (tmp_path / "env-root" / "metrics.csv").exists()


def test_sweep_dogd_single_point_and_determinism(tmp_path):
    out = tmp_path / "sweep"
    argv = ["sweep-dogd", "--grid", "0.5", *QUICK, "--out", str(out)]
    assert main(argv) == 0
    summary = (out / "summary.csv").read_text()
    assert summary.splitlines()[0] == "eta0,final_cum_network_loss"
    assert len(summary.strip().splitlines()) == 2
    assert (out / "eta0_0.5" / "metrics.csv").exists()
    again = tmp_path / "sweep2"
    assert main(["sweep-dogd", "--grid", "0.5", *QUICK, "--out", str(again)]) == 0
    assert (out / "summary.csv").read_bytes() == (again / "summary.csv").read_bytes()


def test_sweep_dogd_bad_grid(tmp_path):
    assert main(["sweep-dogd", "--grid", "a,b", "--out", str(tmp_path)]) == 1
    assert main(["sweep-dogd", "--grid", ",", "--out", str(tmp_path)]) == 1


def test_compare_duplicate_config_identical_rows(tmp_path):
    run_dir = tmp_path / "base"
    assert main(["run", *QUICK, "--out", str(run_dir)]) == 0
    c1, c2 = tmp_path / "one.cfg", tmp_path / "two.cfg"
    c1.write_text((run_dir / "meta").read_text())
    c2.write_text((run_dir / "meta").read_text())
    out = tmp_path / "cmp"
    assert main(["compare", str(c1), str(c2), "--out", str(out)]) == 0
    rows = (out / "summary.csv").read_text().strip().splitlines()[1:]
    assert len(rows) == 2
    assert rows[0].split(",")[1:] == rows[1].split(",")[1:]  # identical apart from name


def test_compare_mismatched_horizons(tmp_path, capsys):
    c1, c2 = tmp_path / "one.cfg", tmp_path / "two.cfg"
    c1.write_text("horizon = 10\nn_agents = 4\ndim = 3\ntopology = complete\n")
    c2.write_text("horizon = 20\nn_agents = 4\ndim = 3\ntopology = complete\n")
    assert main(["compare", str(c1), str(c2), "--out", str(tmp_path / "cmp")]) == 1
    assert "horizon" in capsys.readouterr().err


def test_compare_needs_two(tmp_path):
    c1 = tmp_path / "one.cfg"
    c1.write_text("horizon = 10\n")
    assert main(["compare", str(c1), "--out", str(tmp_path / "cmp")]) == 1


def test_preset_sensitivity_quick(tmp_path):
    out = tmp_path / "p"
    rc = main(
        ["preset", "sensitivity", "--quick", "--set", "horizon=30",
         "--set", "n_agents=4", "--set", "dim=3", "--out", str(out)]
    )
    assert rc == 0
    summary = (out / "sensitivity" / "summary.csv").read_text().strip().splitlines()
    # 4 betting variants + oracle + 7 dogd grid points
    assert len(summary) == 1 + 4 + 1 + 7
    assert (out / "sensitivity" / "coin-wealth_kt" / "metrics.csv").exists()
    assert (out / "sensitivity" / "dogd_eta0_0.001" / "meta").exists()


def test_preset_connectivity_quick_keeps_twenty_agents(tmp_path):
    # the p=0.1 leg is calibrated to 20 agents; at 10 it would rarely connect
    out = tmp_path / "c"
    rc = main(["preset", "connectivity", "--quick", "--set", "horizon=30", "--out", str(out)])
    assert rc == 0
    meta = (out / "connectivity" / "er0.1_seed0" / "meta").read_text()
    assert "n_agents = 20" in meta
    assert "horizon = 30" in meta


def test_preset_real_data_needs_dataset(tmp_path):
    assert main(["preset", "real-data", "--out", str(tmp_path)]) == 1


def test_preset_real_data_runs(tmp_path, rng):
    ds = tmp_path / "tiny.libsvm"
    lines = []
    for _ in range(30):
        v = rng.standard_normal(3)
        feats = " ".join(f"{i + 1}:{x:.4f}" for i, x in enumerate(v))
        lines.append(f"{rng.normal():.4f} {feats}")
    ds.write_text("\n".join(lines) + "\n")
    out = tmp_path / "rd"
    rc = main(
        ["preset", "real-data", "--dataset", str(ds), "--quick",
         "--set", "horizon=20", "--set", "n_agents=4", "--out", str(out)]
    )
    assert rc == 0
    summary = (out / "real-data" / "summary.csv").read_text().strip().splitlines()
    # per dataset: 4 betting variants + oracle + 11 dogd grid points
    assert len(summary) == 1 + 4 + 1 + 11
    # dataset runs have no comparator: regret columns empty
    assert summary[1].endswith(",,")


def test_version_flag(capsys):
    try:
        main(["--version"])
    except SystemExit as e:
        assert e.code == 0
    assert "gossipbet" in capsys.readouterr().out
