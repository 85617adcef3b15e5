import json

import pytest

from mannerforge.cli import main
from mannerforge.dsl import parse_program
from mannerforge.world import world_to_dict, GridObject, Position, WorldState

SPIN = "turn_left turn_left turn_left turn_left"
CAUTIOUS_OUT = (
    "turn_left turn_left turn_right turn_right turn_left walk "
    "turn_left turn_right turn_right turn_left walk "
    "turn_left turn_left turn_right turn_right turn_left walk "
    "turn_left turn_right turn_right turn_left walk"
)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out.strip(), out.err.strip()


def test_ground(capsys):
    code, out, _ = run(capsys, "ground", "--input", "North North West", "--heading", "east")
    assert code == 0
    assert out == "turn_left walk walk turn_left walk"


def test_transform_builtin_cautiously(capsys):
    code, out, _ = run(
        capsys, "transform", "--program", "cautiously",
        "--input", "turn_left walk walk turn_left walk walk", "--heading", "east",
    )
    assert code == 0
    assert out == CAUTIOUS_OUT


def test_transform_program_file(capsys, tmp_path):
    path = tmp_path / "wander.adv"
    path.write_text("name: while wandering\nmode: allocentric\nEast -> North East South\n")
    code, out, _ = run(capsys, "transform", "--program", str(path),
                       "--input", "East", "--heading", "east")
    assert code == 0
    assert out == "turn_left walk turn_right walk turn_right walk"


def test_solve_with_world_file(capsys, tmp_path):
    world = WorldState(
        grid_size=6,
        agent_position=Position(2, 1),
        agent_heading="north",
        objects=(GridObject("circle", "red", 2, Position(1, 1)),),
        target_index=0,
    )
    path = tmp_path / "world.json"
    path.write_text(json.dumps(world_to_dict(world)))
    code, out, _ = run(capsys, "solve", "--world", str(path), "--command", "walk to a circle")
    assert code == 0
    assert out == "walk"


def test_sample_adverbs_writes_parseable_registry(capsys, tmp_path):
    out_file = tmp_path / "registry.txt"
    code, out, _ = run(capsys, "sample-adverbs", "--n", "8", "--seed", "3",
                       "--out", str(out_file),
                       "--weights", "spinning=0.5,cautiously=0.25,detour=0.25")
    assert code == 0
    blocks = [b for b in out_file.read_text().split("\n\n") if b.strip()]
    assert len(blocks) == 8
    for block in blocks:
        parse_program(block)


def test_forge_seed_env_fallback(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("FORGE_SEED", "77")
    a = tmp_path / "a.txt"
    b = tmp_path / "b.txt"
    run(capsys, "sample-adverbs", "--n", "3", "--out", str(a))
    run(capsys, "sample-adverbs", "--n", "3", "--out", str(b))
    assert a.read_text() == b.read_text()
    monkeypatch.setenv("FORGE_SEED", "78")
    c = tmp_path / "c.txt"
    run(capsys, "sample-adverbs", "--n", "3", "--out", str(c))
    assert a.read_text() != c.read_text()


def test_generate_stats_inspect_evaluate_flow(capsys, tmp_path):
    cfg = {
        "seed": 5,
        "num_examples": 120,
        "extra_adverbs": 4,
        "splits": [
            {"kind": "random", "name": "random", "test_fraction": 0.25},
        ],
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out_dir = tmp_path / "ds"

    code, out, _ = run(capsys, "generate", "--config", str(cfg_path), "--out", str(out_dir))
    assert code == 0
    assert "wrote 120 examples" in out

    code, out, _ = run(capsys, "stats", "--dataset", str(out_dir))
    assert code == 0
    stats = json.loads(out)
    assert stats["num_examples"] == 120

    code, out, _ = run(capsys, "inspect", "--dataset", str(out_dir), "--index", "0")
    assert code == 0
    assert "command:" in out and "target:" in out

    # gold predictions from the persisted records
    preds_path = tmp_path / "preds.ndrec"
    with open(out_dir / "examples.ndrec") as fh, open(preds_path, "w") as out_fh:
        for line in fh:
            record = json.loads(line)
            out_fh.write(json.dumps(
                {"index": record["index"], "prediction": record["target"]}) + "\n")
    report_path = tmp_path / "report.json"
    code, out, _ = run(capsys, "evaluate", "--dataset", str(out_dir), "--split", "random",
                       "--predictions", str(preds_path), "--report", str(report_path))
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["splits"]["random"]["exact_match_percent"] == "100.00"


def test_generate_with_preset_name(capsys, tmp_path):
    # Small corpus for speed, but large enough that the preset's k-shot split
    # finds its five "cautiously" examples.
    out_dir = tmp_path / "ds"
    code, out, _ = run(capsys, "generate", "--config", "vocab_x10",
                       "--num-examples", "400", "--seed", "1", "--out", str(out_dir))
    assert code == 0
    assert (out_dir / "manifest").exists()


def test_presets_listed(capsys):
    code, out, _ = run(capsys, "presets")
    assert code == 0
    names = out.splitlines()
    assert "vocab_x150" in names
    assert "kshot_k5" in names
    assert "types_one_cautiously" in names


def test_domain_error_exit_code(capsys, tmp_path):
    code, _, err = run(capsys, "stats", "--dataset", str(tmp_path / "missing"))
    assert code == 1
    assert "error[" in err


def test_unknown_program_is_domain_error(capsys):
    code, _, err = run(capsys, "transform", "--program", "sideways",
                       "--input", "North", "--heading", "east")
    assert code == 1
    assert "error[MannerforgeError]" in err


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as err:
        main(["ground", "--heading", "east"])  # missing --input
    assert err.value.code == 2


def test_bad_symbol_is_domain_error(capsys):
    code, _, err = run(capsys, "ground", "--input", "North fly", "--heading", "east")
    assert code == 1
    assert "error[ValueError]" in err
