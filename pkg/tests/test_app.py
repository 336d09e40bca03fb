import pytest

from app import main
from agents.attack_agent import read_profile

SMALL = ["--B", "4", "--m", "40", "--informative", "4", "--clock-len", "10", "--sigma-n", "0.5",
         "--s-d", "1ppc", "--s-a", "1ppc", "--I-p", "20", "--I-a", "3", "--n-tests", "2", "--n-keys", "4",
         "--design-trace-count", "20", "--rnp-draws", "5", "--progress", "false", "--seed", "5"]


@pytest.fixture
def out_dir(tmp_path):
    return str(tmp_path / "out")


def test_synth_then_ingest_check(out_dir, capsys):
    assert main(["synth", *SMALL, "--out-dir", out_dir, "--n-profiling", "6", "--n-attack", "4"]) == 0
    path = f"{out_dir}/synthetic.txt"
    assert main(["ingest-check", "--dataset-path", path, "--out-dir", out_dir]) == 0
    output = capsys.readouterr().out
    assert "16 chaves, 6..6 traços por chave" in output
    assert "16 chaves, 4..4 traços por chave" in output


def test_ingest_check_with_profiling_count_covering_every_trace(out_dir, tmp_path):
    assert main(["synth", *SMALL, "--out-dir", out_dir, "--n-profiling", "6", "--n-attack", "4"]) == 0
    lines = open(f"{out_dir}/synthetic.txt").read().splitlines()
    single = tmp_path / "single.txt"
    single.write_text("\n".join(lines[:1 + 16 * 6]) + "\n")
    args = ["ingest-check", "--dataset-path", str(single), "--out-dir", out_dir]
    assert main([*args, "--profiling-count", "6"]) == 1
    assert main([*args, "--profiling-count", "4"]) == 0


def test_ingest_check_reports_empty_attack_section(out_dir, tmp_path, capsys):
    path = tmp_path / "two.txt"
    path.write_text(
        "TRACESET v1 m=2 B=1 role=profiling counts=0:2,1:2\n"
        "0,1.0,2.0\n0,1.5,2.5\n1,0.0,1.0\n1,0.5,1.5\n"
        "TRACESET v1 m=2 B=1 role=attack counts=\n"
    )
    assert main(["ingest-check", "--dataset-path", str(path), "--out-dir", out_dir]) == 0
    assert "attack_counts: 0 chaves" in capsys.readouterr().out


def test_design_writes_report(out_dir, capsys):
    assert main(["design", *SMALL, "--out-dir", out_dir]) == 0
    text = capsys.readouterr().out
    assert text.startswith("Ω_P̂ = ")
    assert "scheme=ArN" in text
    with open(f"{out_dir}/design.txt") as f:
        assert f.read() == text


def test_attack_saves_profile(out_dir, tmp_path):
    profile = str(tmp_path / "profile.txt")
    assert main(["attack", *SMALL, "--out-dir", out_dir, "--scheme", "RnF", "--save-profile", profile]) == 0
    model, covariance = read_profile(profile)
    assert model.B == 4
    assert covariance.shape == (len(model.sel), len(model.sel))


def test_attack_reuses_saved_profile(out_dir, tmp_path):
    profile = str(tmp_path / "profile.txt")
    assert main(["attack", *SMALL, "--out-dir", out_dir, "--save-profile", profile]) == 0
    fitted = open(f"{out_dir}/results_none.csv").read()
    reused_dir = str(tmp_path / "reused")
    again = str(tmp_path / "again.txt")
    argv = ["attack", *SMALL, "--out-dir", reused_dir, "--load-profile", profile, "--save-profile", again]
    assert main(argv) == 0
    assert open(f"{reused_dir}/results_none.csv").read() == fitted
    assert open(again).read() == open(profile).read()
    assert main(["attack", *SMALL, "--m", "50", "--out-dir", reused_dir, "--load-profile", profile]) == 1


def test_sweep_from_config_file(out_dir, tmp_path, capsys):
    config = tmp_path / "bench.env"
    config.write_text("sweep=A\nsweep_values=0,40\nschemes=OA,ArN\n")
    assert main(["sweep", "-c", str(config), *SMALL, "--out-dir", out_dir]) == 0
    assert "Varredura: A" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["ingest-check"],
    ["sweep", "--rho", "0"],
    ["design", "--s-d", "pca"],
])
def test_domain_errors_exit_with_one(argv, out_dir):
    assert main([*argv, "--out-dir", out_dir]) == 1
