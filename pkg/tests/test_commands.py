import io
import json
import logging

import pytest

from commands.models.manifest import RunManifest
from lighttree.dump import LightTreeDump
from main import main, parse_args
from neural.checkpoint import checkpoint_load
from scene.loader import load_scene
from utils.logging import configure_logging, progress_enabled, verbosity_level

SMALL = ["--width", "16", "--height", "12", "--spp", "2", "--cluster-level", "1", "--batch-size", "128"]


@pytest.fixture(autouse=True)
def restore_logging():
    """`main` reconfigures the root logger onto the captured stderr; put it back afterwards."""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers = handlers
    root.setLevel(level)


def _error_payload(stderr: str) -> dict:
    lines = [line for line in stderr.splitlines() if line.startswith('{"error"')]
    assert len(lines) == 1, stderr
    return json.loads(lines[0])


@pytest.fixture
def scene_file(tmp_path):
    path = tmp_path / "scenes" / "desk.json"
    code = main(
        ["-q", "gen-scene", "--preset", "desk", "--lights-x", "3", "--lights-z", "2", "--seed", "5", "--out", str(path)]
    )
    assert code == 0
    return path


def test_gen_scene_is_reproducible(tmp_path, scene_file):
    again = tmp_path / "again.json"

    assert main(["-q", "gen-scene", "--preset", "desk", "--lights-x", "3", "--lights-z", "2", "--seed", "5", "--out", str(again)]) == 0

    assert again.read_bytes() == scene_file.read_bytes()
    assert load_scene(scene_file).light_count == 6
    manifest = RunManifest.model_validate_json((scene_file.parent / "manifest.json").read_text())
    assert manifest.command == "gen-scene"
    assert manifest.scene_hash == load_scene(scene_file).content_hash
    assert manifest.flags["lights_x"] == 3
    assert manifest.flags["out"] == str(scene_file)


def test_render_writes_outputs_and_reuses_its_checkpoint(tmp_path, scene_file, cache_env):
    out = tmp_path / "run"
    checkpoint = tmp_path / "net.bin"
    tree = tmp_path / "tree.json"

    code = main(
        ["-q", "render", "--scene", str(scene_file), *SMALL, "--out", str(out)]
        + ["--save-checkpoint", str(checkpoint), "--dump-light-tree", str(tree)]
    )

    assert code == 0
    for name in ("image.pfm", "image.ppm", "stats.csv", "manifest.json"):
        assert (out / name).is_file()
    manifest = RunManifest.model_validate_json((out / "manifest.json").read_text())
    assert manifest.command == "render"
    assert manifest.config["strategy"] == "neural-residual"
    assert manifest.render_seconds is not None and manifest.setup_seconds is not None
    assert len(manifest.build_id) == 40
    assert manifest.flags["command"] == "render"
    assert manifest.flags["scene"] == str(scene_file)
    assert manifest.flags["spp"] == 2
    assert manifest.flags["save_checkpoint"] == str(checkpoint)
    assert "handler" not in manifest.flags
    assert (out / "stats.csv").read_text().splitlines()[0] == "wave,spp,seconds,mse,relmse,strategy"
    assert LightTreeDump.model_validate_json(tree.read_text()).cluster_level == 1
    assert checkpoint_load(checkpoint).step > 0

    resumed = tmp_path / "resumed"
    code = main(
        ["-q", "render", "--scene", str(scene_file), *SMALL, "--out", str(resumed), "--load-checkpoint", str(checkpoint)]
    )
    assert code == 0
    assert (resumed / "image.pfm").is_file()


def _without_seconds(path) -> list[list[str]]:
    rows = [line.split(",") for line in path.read_text().splitlines()]
    column = rows[0].index("seconds")
    return [row[:column] + row[column + 1 :] for row in rows]


def test_repeated_render_is_byte_identical_except_timings(tmp_path, scene_file, cache_env):
    runs = [tmp_path / "first", tmp_path / "second"]
    for out, threads in zip(runs, ("1", "3"), strict=True):
        flags = ["--reference", "auto", "--reference-spp", "4", "--threads", threads, "--out", str(out)]
        assert main(["-q", "render", "--scene", str(scene_file), *SMALL, *flags]) == 0

    first, second = runs
    assert (first / "image.pfm").read_bytes() == (second / "image.pfm").read_bytes()
    assert (first / "image.ppm").read_bytes() == (second / "image.ppm").read_bytes()
    assert _without_seconds(first / "stats.csv") == _without_seconds(second / "stats.csv")
    assert len(_without_seconds(first / "stats.csv")) == 3

def test_malformed_scene_reports_json_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "materials": [\n')

    code = main(["-q", "render", "--scene", str(bad), *SMALL, "--out", str(tmp_path / "out")])

    assert code == 2
    payload = _error_payload(capsys.readouterr().err)
    assert payload["context"]["scene"] == str(bad)
    assert "line" in payload["context"]
    assert "SceneParseError" in payload["detail"]


def test_out_of_range_flag_is_a_configuration_error(tmp_path, scene_file, capsys):
    code = main(["-q", "render", "--scene", str(scene_file), *SMALL, "--train-ratio", "1.5", "--out", str(tmp_path)])

    assert code == 2
    assert _error_payload(capsys.readouterr().err)["context"]["field"] == "train_budget_ratio"


def test_unknown_ablation_axis(tmp_path, capsys):
    code = main(["-q", "ablate", "--preset", "desk", "--axis", "depth", "--out", str(tmp_path)])

    assert code == 2
    payload = _error_payload(capsys.readouterr().err)
    assert payload["context"]["axis"] == "depth"
    assert "residual" in payload["context"]["choices"]


def test_compare_writes_one_row_per_strategy(tmp_path, scene_file, cache_env):
    out = tmp_path / "cmp"

    code = main(
        ["-q", "compare", "--scene", str(scene_file), *SMALL, "--strategies", "uniform,neural-residual"]
        + ["--reference", "auto", "--reference-spp", "4", "--repeats", "2", "--out", str(out)]
    )

    assert code == 0
    lines = (out / "compare.csv").read_text().splitlines()
    assert lines[0] == "budget,strategy,seeds,spp,seconds,mse,relmse"
    assert [line.split(",")[:3] for line in lines[1:]] == [["spp", "uniform", "2"], ["spp", "neural-residual", "2"]]
    assert all(line.split(",")[6] for line in lines[1:])
    assert len(list((out / "convergence").glob("*.csv"))) == 4
    assert len(list((cache_env / "references").glob("*.pfm"))) == 1
    flags = RunManifest.model_validate_json((out / "manifest.json").read_text()).flags
    assert flags["strategies"] == "uniform,neural-residual"
    assert flags["reference_spp"] == 4
    assert flags["scene_seed"] == 0


def test_equal_time_compare_needs_a_time_budget(tmp_path, scene_file):
    code = main(["-q", "compare", "--scene", str(scene_file), *SMALL, "--budget", "time", "--out", str(tmp_path)])

    assert code == 2


def test_ablate_residual_axis(tmp_path, scene_file, cache_env):
    out = tmp_path / "abl"

    code = main(
        ["-q", "ablate", "--scene", str(scene_file), *SMALL, "--axis", "residual"]
        + ["--reference", "auto", "--reference-spp", "4", "--out", str(out)]
    )

    assert code == 0
    lines = (out / "ablation.csv").read_text().splitlines()
    assert [line.split(",")[:2] for line in lines[1:]] == [["residual", "residual"], ["residual", "direct"]]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["values"] == ["residual", "direct"]


def test_verbosity_flags_are_exclusive():
    with pytest.raises(SystemExit):
        parse_args(["-q", "-v", "render"])


@pytest.mark.parametrize(
    ("verbose", "quiet", "level"),
    [(False, False, logging.INFO), (True, False, logging.DEBUG), (False, True, logging.WARNING)],
)
def test_verbosity_level(verbose, quiet, level):
    assert verbosity_level(verbose, quiet) == level


def test_progress_bar_needs_a_terminal_and_info_logging():
    class Terminal:
        def isatty(self):
            return True

        def write(self, text):
            return len(text)

    configure_logging(logging.INFO, stream=Terminal())
    assert progress_enabled(True, Terminal())
    assert not progress_enabled(False, Terminal())
    assert not progress_enabled(True, io.StringIO())

    configure_logging(logging.WARNING, stream=Terminal())
    assert not progress_enabled(True, Terminal())
