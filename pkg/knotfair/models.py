from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import InconsistentSpec, IoFailure, MalformedPath


def _read_json(path: Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise MalformedPath(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from exc


class BadnessWeights(BaseModel):
    """Weights of the objective components plus housekeeping penalty parameters.

    Radii are fractions of the arc-length-normalized knot, except
    ``node_proximity_radius`` which is in curve-parameter units.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    w_angle: float = Field(5.0, ge=0)
    w_bend: float = Field(1.0, ge=0)
    w_cross_sep: float = Field(2.0, ge=0)
    w_repel: float = Field(2.0, ge=0)
    w_topology: float = Field(1.0, ge=0)
    w_curvature_variation: float = Field(0.0, ge=0)
    w_node_proximity: float = Field(0.0, ge=0)

    repel_radius: float = Field(0.03, gt=0)
    cross_sep_radius: float = Field(0.05, gt=0)
    node_proximity_radius: float = Field(0.15, gt=0, le=0.5)
    topology_penalty: float = Field(100.0, ge=0)

    @model_validator(mode="after")
    def _some_weight(self) -> "BadnessWeights":
        weights = (
            self.w_angle,
            self.w_bend,
            self.w_cross_sep,
            self.w_repel,
            self.w_topology,
            self.w_curvature_variation,
            self.w_node_proximity,
        )
        if not any(weight > 0 for weight in weights):
            raise ValueError("at least one weight must be positive")
        return self

    @classmethod
    def from_file(cls, path: Path | str, **overrides: float) -> "BadnessWeights":
        """Load a ``key=value`` weights file; keyword overrides win."""
        path = Path(path)
        if not path.is_file():
            raise IoFailure(f"weights file not found: {path}")
        values: dict[str, object] = {
            key: value for key, value in dotenv_values(path).items() if value is not None
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


class TopologyFingerprint(BaseModel):
    """Crossing count and the sorted set of crossing segment pairs (1-based)."""

    model_config = ConfigDict(frozen=True)

    crossing_count: int = Field(..., ge=0)
    crossing_pairs: tuple[tuple[int, int], ...] = ()

    @model_validator(mode="after")
    def _check_pairs(self) -> "TopologyFingerprint":
        if any(a >= b for a, b in self.crossing_pairs):
            raise ValueError("crossing pairs must be ordered (seg_a < seg_b)")
        if len(set(self.crossing_pairs)) != len(self.crossing_pairs):
            raise ValueError("crossing pairs must be distinct")
        if list(self.crossing_pairs) != sorted(self.crossing_pairs):
            raise ValueError("crossing pairs must be sorted")
        return self

    def discrepancy(self, other: "TopologyFingerprint") -> int:
        """Crossing pairs present in only one fingerprint, plus any change in repeated crossings."""
        differing = len(set(self.crossing_pairs) ^ set(other.crossing_pairs))
        repeats = self.crossing_count - len(self.crossing_pairs)
        other_repeats = other.crossing_count - len(other.crossing_pairs)
        return differing + abs(repeats - other_repeats)


class SymmetrySpec(BaseModel):
    """Mirror pairs, on-axis nodes and rotation orbits (1-based node indices).

    The mirror axis is the vertical line x = 0 and rotation is about the
    origin; ``rotation_order`` is 0 without rotational symmetry. Consistency
    against a particular knot is checked by :func:`knotfair.symmetry.symmetry_group`.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    mver: tuple[tuple[int, int], ...] = ()
    xver: tuple[int, ...] = ()
    mrot: tuple[tuple[int, ...], ...] = ()
    rotation_order: int = Field(0, ge=0)

    @model_validator(mode="before")
    @classmethod
    def _fill_defaults(cls, data: object) -> object:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        if isinstance(data.get("xver"), int):
            data["xver"] = [data["xver"]]
        orbits = data.get("mrot") or ()
        if orbits and not data.get("rotation_order"):
            data["rotation_order"] = len(orbits[0])
        return data

    @property
    def trivial(self) -> bool:
        return not (self.mver or self.xver or self.mrot)

    @classmethod
    def from_file(cls, path: Path | str) -> "SymmetrySpec":
        try:
            return cls.model_validate(_read_json(Path(path)))
        except ValidationError as exc:
            raise InconsistentSpec(f"{path}: {exc.errors()[0]['msg']}") from exc


class OverUnderSpec(BaseModel):
    """One row per crossing: (over segment, under segment), 1-based."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    rows: tuple[tuple[int, int], ...] = ()

    @model_validator(mode="after")
    def _distinct(self) -> "OverUnderSpec":
        for over, under in self.rows:
            if over == under:
                raise ValueError(f"row ({over},{under}) names the same segment twice")
        return self

    @classmethod
    def from_file(cls, path: Path | str) -> "OverUnderSpec":
        return cls.model_validate(_read_json(Path(path)))


class RenderOptions(BaseModel):
    gap: float = Field(15.0, ge=0, description="Understrand break half-length in display units")
    show_nodes: bool = False
    show_handles: bool = False
    show_curvature: bool = False
    curvature_scale: float = Field(
        1.0, gt=0, description="Glyph radius (display units) per unit curvature of the length-1 knot"
    )
    curvature_samples: int = Field(120, ge=1)
    show_labels: bool = False
    rainbow: bool = False
    stroke_width: float = Field(4.0, gt=0)
    margin: float = Field(20.0, ge=0)


# Render document primitives. Coordinates are SVG user units, y down.


class PathPrimitive(BaseModel):
    segments: list[list[tuple[float, float]]] = Field(
        default_factory=list, description="Cubic pieces, four control points each"
    )
    closed: bool = False
    stroke: str = "black"
    stroke_width: float = 4.0
    role: str = "knot"


class LinePrimitive(BaseModel):
    start: tuple[float, float]
    end: tuple[float, float]
    stroke: str = "gray"
    stroke_width: float = 1.0
    role: str = "handle"


class CirclePrimitive(BaseModel):
    center: tuple[float, float]
    radius: float = Field(..., ge=0)
    stroke: str = "gray"
    fill: str = "none"
    stroke_width: float = 1.0
    role: str = "handle"


class LabelPrimitive(BaseModel):
    position: tuple[float, float]
    text: str
    font_size: float = 12.0
    fill: str = "black"
    role: str = "segment"


class GapPrimitive(BaseModel):
    """An understrand break: the interval [t_start, t_end] of ``segment`` is not drawn."""

    segment: int
    over: int
    t_start: float
    t_end: float
    center: tuple[float, float]
    length: float = Field(..., ge=0)


class RenderDoc(BaseModel):
    view_box: Optional[tuple[float, float, float, float]] = None
    background: Optional[str] = None
    paths: list[PathPrimitive] = Field(default_factory=list)
    lines: list[LinePrimitive] = Field(default_factory=list)
    circles: list[CirclePrimitive] = Field(default_factory=list)
    labels: list[LabelPrimitive] = Field(default_factory=list)
    gaps: list[GapPrimitive] = Field(default_factory=list)


class OptimizeOptions(BaseModel):
    algorithm: Literal["nelder-mead", "bfgs-fd"] = "nelder-mead"
    max_evals: int = Field(200_000, gt=0)
    ftol: float = Field(1e-9, gt=0)
    xtol: float = Field(1e-7, gt=0)
    checkpoint_every: int = Field(1000, gt=0)
    seed: int = 0
    restart_count: int = Field(0, ge=0)
    fd_step: float = Field(1e-7, gt=0)
    gtol: float = Field(1e-6, gt=0, description="bfgs-fd stops below this gradient norm, badness per normalized unit")
    simplex_scale: float = Field(0.02, gt=0, description="Initial simplex step per coordinate, normalized units")


class ComponentValues(BaseModel):
    angle: float = 0.0
    bend: float = 0.0
    cross_sep: float = 0.0
    repel: float = 0.0
    topology: float = 0.0
    curvature_variation: float = 0.0
    node_proximity: float = 0.0


class ComponentBreakdown(BaseModel):
    raw: ComponentValues
    weighted: ComponentValues
    total: float


class OptimizeReport(BaseModel):
    algorithm: str
    initial_badness: float
    final_badness: float
    evals: int = 0
    converged: bool = False
    message: str = ""
    dimension: int
    symmetric: bool = False
    topology_changed: bool = False
    before: Optional[ComponentBreakdown] = None
    after: Optional[ComponentBreakdown] = None
    trajectory: list[tuple[int, float]] = Field(default_factory=list)


# HTTP payloads


class KnotRequest(BaseModel):
    svg: str = Field(..., description="SVG document text holding the knot path")
    element_id: Optional[str] = None


class InspectResponse(BaseModel):
    nodes: int
    dim: int
    crossings: int
    crossing_pairs: list[tuple[int, int]]
    components: Optional[ComponentBreakdown] = None


class BadnessRequest(KnotRequest):
    weights: BadnessWeights = Field(default_factory=BadnessWeights)


class BadnessResponse(BaseModel):
    badness: float
    components: ComponentBreakdown


class SymmetrizeRequest(KnotRequest):
    symmetry: SymmetrySpec


class SymmetrizeResponse(BaseModel):
    svg: str
    error_before: float
    error_after: float


class RenderRequest(KnotRequest):
    overunder: Optional[OverUnderSpec] = None
    options: RenderOptions = Field(default_factory=RenderOptions)


class ConfigResponse(BaseModel):
    version: str
    threads: int
    stroke_width: float
    gap: float
    weights: BadnessWeights


class ProjectFile(BaseModel):
    """Paths for one knot, so a command line can name a single project file.

    Relative paths resolve against the project file's directory.
    """

    model_config = ConfigDict(extra="forbid")

    svg: Path
    weights: Optional[Path] = None
    symmetry: Optional[Path] = None
    overunder: Optional[Path] = None
    output: Optional[Path] = None
    preview: Optional[Path] = None

    @classmethod
    def from_file(cls, path: Path | str) -> "ProjectFile":
        path = Path(path)
        project = cls.model_validate(_read_json(path))
        base = path.parent
        resolved = {
            name: (base / value if value is not None and not value.is_absolute() else value)
            for name, value in project.model_dump().items()
        }
        return cls(**resolved)

    def check(self) -> None:
        """Raise :class:`IoFailure` for any input file that does not exist."""
        for name in ("svg", "weights", "symmetry", "overunder"):
            value = getattr(self, name)
            if value is not None and not value.exists():
                raise IoFailure(f"project {name} file not found: {value}")
