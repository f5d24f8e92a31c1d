"""``gforge`` command line: parse, check, weave, gen, graph, plan, pipeline.

Exit codes: 0 ok, 1 lex/parse error, 2 validation error, 3 unmatched
constraint annotations, 4 infeasible deployment, 5 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional

from . import codegen
from .deploy import DeploymentSpec, plan_deployment
from .engine import StageFilter, WeaveError, weave
from .errors import DuplicateKey, FrontendError, Infeasible, InvalidSpec, LibraryError, NameCollision, RewriteError
from .frontend import dump, parse_ast, pretty_print, read_infrastructure
from .frontend.ast import AstNode
from .frontend.elaborate import elaborate_construct, elaborate_infrastructure, elaborate_model
from .library import Library, builtin_library, load_library
from .model import ArchitectureModel, Violation, check_well_formed
from .style import check_behaviour_refs, check_gateway_style

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INVALID = 2
EXIT_UNMATCHED = 3
EXIT_INFEASIBLE = 4
EXIT_IO = 5

LIBRARY_ENV = "GFORGE_LIBRARY"

log = logging.getLogger("gforge")


class Exit(Exception):
    def __init__(self, code: int):
        super().__init__(code)
        self.code = code


def _error(prefix: str, message: str):
    print(f"{prefix}: error: {message}", file=sys.stderr)


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        _error(path, f"cannot read file: {exc}")
        raise Exit(EXIT_IO)


def _write_text(path, text: str):
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        _error(str(path), f"cannot write file: {exc}")
        raise Exit(EXIT_IO)


def _frontend_error(path: str, exc: FrontendError):
    if exc.span is not None:
        print(f"{exc.span}: error: {exc.message}", file=sys.stderr)
    else:
        _error(f"{path}:1:1", exc.message)
    raise Exit(EXIT_PARSE)


def _path_text(node: AstNode) -> str:
    return "::".join(str(node.attrs.get(k)) for k in ("element", "port", "point"))


class LoadedModel:
    def __init__(self, path: str, ast: AstNode, model: ArchitectureModel):
        self.path = path
        self.ast = ast
        self.model = model
        self.spans = {n.value: n.span for n in ast.walk() if n.kind == "element"}
        for n in ast.walk():
            if n.kind == "attachment":
                a, b = (_path_text(c) for c in n.children[:2])
                self.spans.setdefault(f"{a} -> {b}", n.span)
                self.spans.setdefault(f"{b} -> {a}", n.span)

    def location(self, v: Violation) -> str:
        span = self.spans.get(v.subject) if v.subject else None
        return str(span) if span else f"{self.path}:{self.ast.span.line}:{self.ast.span.column}"


def _load_model(path: str) -> LoadedModel:
    text = _read_text(path)
    try:
        ast = parse_ast(text, path)
        if ast.kind != "model":
            _error(f"{path}:1:1", f"expected an architecture model, found a {ast.kind} file")
            raise Exit(EXIT_PARSE)
        return LoadedModel(path, ast, elaborate_model(ast))
    except FrontendError as exc:
        _frontend_error(path, exc)


def _load_library(arg: Optional[str]) -> Library:
    directory = arg or os.environ.get(LIBRARY_ENV)
    try:
        if not directory:
            return builtin_library()
        return load_library(directory)
    except LibraryError as exc:
        for name, cause in exc.failures:
            if isinstance(cause, FrontendError) and cause.span is not None:
                print(f"{cause.span}: error: {cause.message}", file=sys.stderr)
            else:
                _error(name, str(cause))
        raise Exit(EXIT_PARSE)
    except DuplicateKey as exc:
        _error(directory, str(exc))
        raise Exit(EXIT_INVALID)
    except OSError as exc:
        _error(str(directory), str(exc))
        raise Exit(EXIT_IO)


def _load_infra(path: str):
    text = _read_text(path)
    try:
        return read_infrastructure(text, path)
    except FrontendError as exc:
        _frontend_error(path, exc)


def _report_violations(loaded: LoadedModel, violations: list[Violation]) -> bool:
    for v in violations:
        print(f"{loaded.location(v)}: error: {v}", file=sys.stderr)
    return bool(violations)


def _validate(loaded: LoadedModel, style: bool = True):
    violations = check_well_formed(loaded.model)
    if style:
        violations += check_gateway_style(loaded.model) + check_behaviour_refs(loaded.model)
    if _report_violations(loaded, violations):
        raise Exit(EXIT_INVALID)


def _weave(loaded: LoadedModel, library: Library, stage: StageFilter):
    try:
        return weave(loaded.model, library, stage)
    except WeaveError as exc:
        _error(loaded.path, f"weaving failed: {exc}")
        raise Exit(EXIT_INVALID)


def _gen(model: ArchitectureModel, granularity: str, out_dir) -> list[Path]:
    try:
        return codegen.emit_manifests(model, codegen.Granularity(granularity), out_dir)
    except NameCollision as exc:
        _error(str(out_dir), str(exc))
        raise Exit(EXIT_INVALID)
    except OSError as exc:
        _error(str(out_dir), f"cannot write artifacts: {exc}")
        raise Exit(EXIT_IO)


def _plan(loaded: LoadedModel, infra_path: str, deploy_path: Optional[str], out_path):
    infra = _load_infra(infra_path)
    try:
        spec = DeploymentSpec.load(deploy_path) if deploy_path else DeploymentSpec()
    except OSError as exc:
        _error(deploy_path, f"cannot read file: {exc}")
        raise Exit(EXIT_IO)
    except InvalidSpec as exc:
        _error(deploy_path, str(exc))
        raise Exit(EXIT_INVALID)
    try:
        plan = plan_deployment(loaded.model, infra, spec)
    except InvalidSpec as exc:
        _error(deploy_path or infra_path, str(exc))
        raise Exit(EXIT_INVALID)
    except Infeasible as exc:
        _error(infra_path, str(exc))
        raise Exit(EXIT_INFEASIBLE)
    _write_text(out_path, plan.to_json())
    return plan


# -- subcommands ------------------------------------------------------------

def cmd_parse(args) -> int:
    text = _read_text(args.file)
    try:
        ast = parse_ast(text, args.file)
        if ast.kind == "model":
            value = elaborate_model(ast)
        elif ast.kind == "construct":
            value = elaborate_construct(ast, args.file)
        else:
            value = elaborate_infrastructure(ast)
    except FrontendError as exc:
        _frontend_error(args.file, exc)
    sys.stdout.write(dump(ast) + "\n" if args.emit_ast else pretty_print(value))
    return EXIT_OK


def cmd_check(args) -> int:
    loaded = _load_model(args.file)
    _validate(loaded)
    print(f"{args.file}: ok")
    return EXIT_OK


def cmd_weave(args) -> int:
    loaded = _load_model(args.file)
    _validate(loaded, style=False)
    library = _load_library(args.library)
    model, report = _weave(loaded, library, StageFilter(args.stage))
    _write_text(args.output, pretty_print(model))
    if args.report:
        _write_text(args.report, report.to_keyvalue())
    sys.stdout.write(report.to_text())
    for ann in report.unmatched:
        _error(loaded.path, f"no construct for {ann} on {ann.target or model.name}")
    return EXIT_UNMATCHED if report.unmatched else EXIT_OK


def cmd_gen(args) -> int:
    loaded = _load_model(args.file)
    _validate(loaded, style=False)
    for path in _gen(loaded.model, args.granularity, args.out_dir):
        print(path)
    return EXIT_OK


def cmd_graph(args) -> int:
    loaded = _load_model(args.file)
    _validate(loaded, style=False)
    _write_text(args.output, codegen.render_graph(loaded.model))
    return EXIT_OK


def cmd_plan(args) -> int:
    loaded = _load_model(args.file)
    _validate(loaded, style=False)
    plan = _plan(loaded, args.infra, args.deploy, args.output)
    for c, n in plan.assignment.items():
        print(f"{c} -> {n}")
    return EXIT_OK


def cmd_pipeline(args) -> int:
    loaded = _load_model(args.file)
    _validate(loaded)
    library = _load_library(args.library)
    out = Path(args.out_dir)
    stem = Path(args.file).name.split(".")[0]

    qos_model, qos_report = _weave(loaded, library, StageFilter.QOS)
    qos_path = out / f"{stem}.gecm-applied.gdsl"
    _write_text(qos_path, pretty_print(qos_model))
    sys.stdout.write(qos_report.to_text())

    staged = LoadedModel(str(qos_path), loaded.ast, qos_model)
    gesm, platform_report = _weave(staged, library, StageFilter.PLATFORM)
    _write_text(out / f"{stem}.gesm.gdsl", pretty_print(gesm))
    sys.stdout.write(platform_report.to_text())

    unmatched = qos_report.unmatched + platform_report.unmatched
    if unmatched:
        for ann in unmatched:
            _error(loaded.path, f"no construct for {ann} on {ann.target or gesm.name}")
        return EXIT_UNMATCHED

    final = LoadedModel(str(out / f"{stem}.gesm.gdsl"), loaded.ast, gesm)
    _validate(final, style=False)
    _gen(gesm, args.granularity, out)
    _write_text(out / f"{stem}.dot", codegen.render_graph(gesm))
    _plan(final, args.infra, args.deploy, out / "plan.json")
    print(f"pipeline complete: {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gforge", description="Science Gateway model compiler")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("parse", help="parse a .gdsl/.gcon/.germ file and print it canonically")
    s.add_argument("file")
    s.add_argument("--emit-ast", action="store_true", help="print the syntax tree instead")
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("check", help="well-formedness, style and behaviour checks")
    s.add_argument("file")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("weave", help="weave library constructs into a model")
    s.add_argument("file")
    s.add_argument("--library", help=f"construct directory (default: ${LIBRARY_ENV} or the built-in library)")
    s.add_argument("--stage", choices=[f.value for f in StageFilter], default="all")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--report", help="also write a key=value weave report")
    s.set_defaults(func=cmd_weave)

    s = sub.add_parser("gen", help="generate service manifests")
    s.add_argument("file")
    s.add_argument("--granularity", choices=[g.value for g in codegen.Granularity],
                   default=codegen.Granularity.COMPLEX_OBJECTS.value)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("graph", help="export the architecture as Graphviz DOT")
    s.add_argument("file")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_graph)

    s = sub.add_parser("plan", help="compute a deployment plan")
    s.add_argument("file")
    s.add_argument("--infra", required=True)
    s.add_argument("--deploy", help="JSON deployment spec with pins and weights")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_plan)

    s = sub.add_parser("pipeline", help="run every stage and keep the intermediate models")
    s.add_argument("file")
    s.add_argument("--library")
    s.add_argument("--infra", required=True)
    s.add_argument("--deploy")
    s.add_argument("--granularity", choices=[g.value for g in codegen.Granularity],
                   default=codegen.Granularity.COMPLEX_OBJECTS.value)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not logging.getLogger().handlers:
        logging.basicConfig(level=logging.WARNING, format="warning: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except Exit as exc:
        return exc.code
    except RewriteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
