"""Command line: inspect, optimize, render and symmetrize knot drafts.

``python -m knotfair <command> ...``; ``serve`` starts the HTTP surface.
Exit codes: 0 success, 2 input error, 3 topology violation, 4 over/under
mismatch.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

import uvicorn
from pydantic import ValidationError

from .badness import component_breakdown
from .config import settings
from .errors import IoFailure, KnotError, OverUnderMismatch, TopologyChanged
from .knot import (
    KNOTVEC_HEADER,
    MinObj,
    fingerprint,
    from_knotvec,
    read_knotvec,
    to_controlpoints,
    to_knotvec,
    to_minobj,
    write_knotvec,
)
from .models import (
    BadnessWeights,
    ComponentBreakdown,
    OptimizeOptions,
    OverUnderSpec,
    ProjectFile,
    RenderOptions,
    SymmetrySpec,
)
from .optimizer import minimize, read_checkpoint, require_topology
from .render import knotplot, knotplot2
from .svg_io import read_svg, write_svg
from .symmetry import ReducedVec, expand, reduced_dimension, symmetrize, symmetry_error

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_TOPOLOGY = 3
EXIT_OVERUNDER = 4


def num(value: float) -> str:
    return f"{value:.7g}"


def configure_logging(level: Optional[str] = None) -> None:
    """stderr handler with bare messages; a log file too outside production mode."""
    root = logging.getLogger()
    for handler in [h for h in root.handlers if getattr(h, "knotfair", False)]:
        root.removeHandler(handler)
        handler.close()
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    handlers[0].setFormatter(logging.Formatter("%(message)s"))
    if not settings.production_mode:
        settings.logs_dir.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(settings.logs_dir / "knotfair.log")
        file_handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        handlers.append(file_handler)
    for handler in handlers:
        handler.knotfair = True  # type: ignore[attr-defined]
        root.addHandler(handler)
    root.setLevel(level or settings.log_level)


# --- loading -----------------------------------------------------------------


def _project(args: argparse.Namespace) -> None:
    """Fill unset path arguments from ``--project``."""
    if not getattr(args, "project", None):
        return
    project = ProjectFile.from_file(args.project)
    project.check()
    for name in ("weights", "symmetry", "overunder", "output", "preview"):
        if hasattr(args, name) and getattr(args, name) is None:
            setattr(args, name, getattr(project, name))
    if getattr(args, "knot", None) is None:
        args.knot = project.svg


def load_knot(path: Path, element_id: Optional[str] = None) -> MinObj:
    """A knot from an SVG draft or a knot vector file."""
    path = Path(path)
    if not path.exists():
        raise IoFailure(f"file not found: {path}")
    if path.suffix != ".svg":
        with path.open() as handle:
            if handle.readline().startswith(KNOTVEC_HEADER):
                return from_knotvec(read_knotvec(path))
    return to_minobj(read_svg(path, element_id))


def parse_overrides(pairs: Sequence[str]) -> dict[str, str]:
    overrides = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep:
            raise IoFailure(f"expected key=value, got '{pair}'")
        overrides[key.strip()] = value.strip()
    return overrides


def load_weights(args: argparse.Namespace) -> BadnessWeights:
    overrides = parse_overrides(getattr(args, "set", None))
    path = getattr(args, "weights", None) or settings.weights_file
    if path:
        return BadnessWeights.from_file(path, **overrides)
    return BadnessWeights(**overrides)


def print_breakdown(before: ComponentBreakdown, after: Optional[ComponentBreakdown] = None) -> None:
    for name, value in before.weighted.model_dump().items():
        line = f"  {name:<20} {num(value)}"
        if after is not None:
            line += f" -> {num(getattr(after.weighted, name))}"
        print(line)
    total = f"badness={num(before.total)}"
    if after is not None:
        total += f" -> {num(after.total)}"
    print(total)


# --- commands ----------------------------------------------------------------


def cmd_inspect(args: argparse.Namespace) -> int:
    m = load_knot(args.knot, args.element_id)
    c = to_controlpoints(m)
    found = fingerprint(c, threads=settings.threads)
    print(f"nodes={m.n} dim={4 * m.n} crossings={found.crossing_count}")
    print("crossing pairs: " + (" ".join(f"({a},{b})" for a, b in found.crossing_pairs) or "none"))
    print_breakdown(component_breakdown(c, load_weights(args)))
    return EXIT_OK


def cmd_optimize(args: argparse.Namespace) -> int:
    m = load_knot(args.knot, args.element_id)
    weights = load_weights(args)
    spec = SymmetrySpec.from_file(args.symmetry) if args.symmetry else None
    if spec is not None:
        m = m.centered()
        logger.info("reduced dimension %d of %d", reduced_dimension(spec, m.n), 4 * m.n)
    options = OptimizeOptions(
        algorithm=args.algorithm,
        max_evals=args.max_evals,
        seed=args.seed,
        restart_count=args.restarts,
        checkpoint_every=args.checkpoint_every,
    )
    start = to_knotvec(m)
    checkpoint = args.checkpoint
    if checkpoint == Path(""):  # argparse passes const="" through type=Path
        checkpoint = settings.checkpoints_dir / f"{Path(args.knot).stem}.knotvec"
    offset = 0
    if args.resume:
        if not checkpoint or not Path(checkpoint).exists():
            raise IoFailure("--resume needs an existing --checkpoint file")
        start, previous = read_checkpoint(checkpoint)
        offset = previous.evals if previous is not None else 0
        logger.info("resuming from %s after %d evaluations", checkpoint, offset)

    point, report = minimize(start, weights, spec, options, checkpoint=checkpoint, evals_offset=offset)
    knot = to_knotvec(expand(point)) if isinstance(point, ReducedVec) else point

    output = Path(args.output or settings.base_dir / f"{Path(args.knot).stem}.knotvec")
    write_knotvec(knot, output)
    preview = Path(args.preview or output.with_suffix(".svg"))
    write_svg(knotplot2(to_controlpoints(from_knotvec(knot)), RenderOptions(stroke_width=settings.stroke_width)), preview)

    print(f"algorithm={report.algorithm} dim={report.dimension} evals={report.evals} converged={report.converged}")
    if report.before is not None:
        print_breakdown(report.before, report.after)
    if spec is not None:
        print(f"symmetry_error={num(symmetry_error(from_knotvec(knot), spec))}")
    print(f"wrote {output}")
    print(f"wrote {preview}")
    require_topology(report)
    return EXIT_OK


def render_options(args: argparse.Namespace) -> RenderOptions:
    return RenderOptions(
        gap=settings.gap if args.gap is None else args.gap,
        stroke_width=settings.stroke_width if args.stroke_width is None else args.stroke_width,
        show_nodes=args.show_nodes,
        show_handles=args.show_handles,
        show_curvature=args.show_curvature,
        show_labels=args.show_labels,
        rainbow=args.rainbow,
    )


def cmd_render(args: argparse.Namespace) -> int:
    c = to_controlpoints(load_knot(args.knot, args.element_id))
    options = render_options(args)
    if args.overunder:
        doc = knotplot(c, OverUnderSpec.from_file(args.overunder), options)
    else:
        doc = knotplot2(c, options)
    output = Path(args.output or settings.renders_dir / f"{Path(args.knot).stem}.svg")
    write_svg(doc, output)
    print(f"paths={len(doc.paths)} breaks={len(doc.gaps)}")
    print(f"wrote {output}")
    return EXIT_OK


def cmd_symmetrize(args: argparse.Namespace) -> int:
    if not args.symmetry:
        raise IoFailure("symmetrize needs --symmetry")
    spec = SymmetrySpec.from_file(args.symmetry)
    m = load_knot(args.knot, args.element_id).centered()
    before = symmetry_error(m, spec)
    result = symmetrize(m, spec)
    after = symmetry_error(result, spec)
    output = Path(args.output or settings.base_dir / f"{Path(args.knot).stem}.symmetric.svg")
    write_svg(knotplot2(to_controlpoints(result), RenderOptions(stroke_width=settings.stroke_width)), output)
    print(f"symmetry_error before={num(before)} after={num(after)}")
    print(f"wrote {output}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    uvicorn.run("knotfair.app:app", host=args.host, port=args.port, reload=False, log_level="info")
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def _knot_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("knot", nargs="?", type=Path, help="SVG draft or knot vector file")
    parser.add_argument("--project", type=Path, help="JSON project file naming the input paths")
    parser.add_argument("--element-id", help="id of the path element to read")
    parser.add_argument("--output", "-o", type=Path)


def _weight_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--weights", type=Path, help="key=value weights file")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one weight")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="knotfair", description="Beautify knot diagrams drawn as Bezier paths.")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--version", action="version", version=settings.version)
    commands = parser.add_subparsers(dest="command", required=True)

    inspect = commands.add_parser("inspect", help="node count, crossings and badness components")
    _knot_arguments(inspect)
    _weight_arguments(inspect)
    inspect.set_defaults(handler=cmd_inspect)

    optimize = commands.add_parser("optimize", help="minimize badness")
    _knot_arguments(optimize)
    _weight_arguments(optimize)
    optimize.add_argument("--symmetry", type=Path, help="symmetry spec (JSON)")
    optimize.add_argument("--algorithm", choices=["nelder-mead", "bfgs-fd"], default="nelder-mead")
    optimize.add_argument("--max-evals", type=int, default=OptimizeOptions().max_evals)
    optimize.add_argument("--seed", type=int, default=0)
    optimize.add_argument("--restarts", type=int, default=0)
    optimize.add_argument(
        "--checkpoint",
        type=Path,
        nargs="?",
        const="",
        help="knot vector file refreshed during the search (bare flag: <checkpoints_dir>/<input stem>.knotvec)",
    )
    optimize.add_argument("--checkpoint-every", type=int, default=OptimizeOptions().checkpoint_every)
    optimize.add_argument("--resume", action="store_true", help="continue from --checkpoint")
    optimize.add_argument("--preview", type=Path, help="SVG preview of the result")
    optimize.set_defaults(handler=cmd_optimize)

    render = commands.add_parser("render", help="draw the knot")
    _knot_arguments(render)
    render.add_argument("--overunder", type=Path, help="over/under spec (JSON); enables understrand breaks")
    render.add_argument("--gap", type=float)
    render.add_argument("--stroke-width", type=float)
    render.add_argument("--show-nodes", action="store_true")
    render.add_argument("--show-handles", action="store_true")
    render.add_argument("--show-curvature", action="store_true")
    render.add_argument("--show-labels", action="store_true")
    render.add_argument("--rainbow", action="store_true")
    render.set_defaults(handler=cmd_render)

    sym = commands.add_parser("symmetrize", help="project the knot onto a symmetry spec")
    _knot_arguments(sym)
    sym.add_argument("--symmetry", type=Path)
    sym.set_defaults(handler=cmd_symmetrize)

    serve = commands.add_parser("serve", help="run the HTTP surface")
    serve.add_argument("--host", default="0.0.0.0")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(handler=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        _project(args)
        if args.command != "serve" and getattr(args, "knot", None) is None:
            raise IoFailure("no input: give a knot file or --project")
        return handler(args)
    except OverUnderMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OVERUNDER
    except TopologyChanged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOPOLOGY
    except (KnotError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
