import json

import pytest
from pydantic import ValidationError

from knotfair.config import KnotSettings
from knotfair.errors import InconsistentSpec, IoFailure, MalformedPath
from knotfair.models import OverUnderSpec, ProjectFile, RenderOptions, SymmetrySpec


def test_settings_defaults_and_env(monkeypatch, tmp_path):
    monkeypatch.setenv("KNOT_GAP", "7.5")
    monkeypatch.setenv("KNOT_BASE_DIR", str(tmp_path))
    monkeypatch.setenv("KNOT_LOG_LEVEL", "debug")
    s = KnotSettings()
    assert s.gap == 7.5
    assert s.log_level == "DEBUG"
    assert s.checkpoints_dir == tmp_path / "checkpoints"
    assert s.renders_dir == tmp_path / "renders"
    assert s.production_mode


def test_settings_threads_at_least_one():
    assert KnotSettings(threads=0).threads == 1
    assert KnotSettings().threads >= 1


def test_settings_reject_unknown_level():
    with pytest.raises(ValidationError):
        KnotSettings(log_level="chatty")


def test_symmetry_spec_accepts_scalar_axis_node():
    spec = SymmetrySpec.model_validate({"mver": [[1, 2]], "xver": 3})
    assert spec.xver == (3,)
    assert spec.rotation_order == 0
    assert not spec.trivial
    assert SymmetrySpec().trivial


def test_symmetry_spec_file_errors(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{\n  \"mver\": [[1, 2]\n")
    with pytest.raises(MalformedPath, match="broken.json"):
        SymmetrySpec.from_file(broken)
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"mver": "both sides"}))
    with pytest.raises(InconsistentSpec):
        SymmetrySpec.from_file(wrong)
    with pytest.raises(IoFailure):
        SymmetrySpec.from_file(tmp_path / "absent.json")


def test_overunder_rows():
    assert OverUnderSpec(rows=((12, 1),)).rows == ((12, 1),)
    with pytest.raises(ValidationError, match="same segment"):
        OverUnderSpec(rows=((3, 3),))


def test_render_options_bounds():
    with pytest.raises(ValidationError):
        RenderOptions(gap=-1.0)
    with pytest.raises(ValidationError):
        RenderOptions(stroke_width=0.0)
    assert RenderOptions(gap=0.0).gap == 0.0


def test_project_paths_resolve_against_the_file(tmp_path):
    (tmp_path / "knots").mkdir()
    (tmp_path / "knots" / "draft.svg").write_text("<svg/>")
    project = tmp_path / "knots" / "draft.json"
    project.write_text(json.dumps({"svg": "draft.svg", "output": "/abs/out.knotvec"}))
    loaded = ProjectFile.from_file(project)
    assert loaded.svg == tmp_path / "knots" / "draft.svg"
    assert str(loaded.output) == "/abs/out.knotvec"
    assert loaded.weights is None
    loaded.check()


def test_project_rejects_unknown_keys_and_missing_inputs(tmp_path):
    project = tmp_path / "p.json"
    project.write_text(json.dumps({"svg": "a.svg", "colour": "red"}))
    with pytest.raises(ValidationError):
        ProjectFile.from_file(project)
    project.write_text(json.dumps({"svg": "a.svg"}))
    with pytest.raises(IoFailure, match="a.svg"):
        ProjectFile.from_file(project).check()
