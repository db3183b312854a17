"""Command-line front end.

Exit codes: 0 success, 1 usage or input error, 2 verification found a
counterexample (or an imported topology is invalid).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import AddressError, FabricParams, FabricTopology, Stage, validate_topology
from .fabric import build_classical, build_stage
from .metrics import (
    cabling_report,
    component_census,
    coupler_loss_db,
    loss_budget,
)
from .routing import (
    ConnectionRequest,
    InternalContention,
    RoutingError,
    WavelengthBusyAtEndpoint,
    WavelengthState,
    resolve_path,
    verify_nonblocking,
)
from .serialize import (
    dumps,
    export_document,
    format_trace,
    import_document,
    parse_request_line,
    render_dot,
    render_table,
)
from .shuffle import build_modular_shuffle, build_table, check_equivalence, factorize_table

EXIT_OK, EXIT_USAGE, EXIT_COUNTEREXAMPLE = 0, 1, 2

_STAGES = {
    "classical": Stage.CLASSICAL,
    "prime": Stage.PRIME,
    "double-prime": Stage.DOUBLE_PRIME,
    "modular": Stage.MODULAR,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _size(args) -> tuple[int, int, int]:
    """Resolve ``--N`` / ``--n --r`` into ``(N, n, r)``."""
    N, n, r = args.N, args.n, args.r
    if n is None and r is None:
        if N is None:
            raise UsageError("give --N or --n and --r")
        return N, 1, N
    if n is None or r is None:
        if N is None:
            raise UsageError("--n and --r must be given together")
        n = n if n is not None else N // r
        r = r if r is not None else N // n
    if N is not None and N != n * r:
        raise UsageError(f"N={N} is not n*r={n}*{r}")
    if n < 1 or r < 1:
        raise UsageError("n and r must be positive")
    return n * r, n, r


def _fabric(args) -> FabricTopology:
    if getattr(args, "fabric", None):
        return import_document(json.loads(Path(args.fabric).read_text()))
    N, n, r = _size(args)
    stage = args.stage
    if stage is None:
        stage = "classical" if args.n is None and args.r is None else "modular"
    if stage == "classical":
        return build_classical(N, args.w)
    return build_stage(_STAGES[stage], n, r, args.w, sealed=args.sealed,
                       coupler_input=args.coupler_input)


def _end(text: str):
    text = text.strip().strip("()")
    if "," in text:
        a, b = text.split(",")
        return (int(a), int(b))
    return int(text)


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_build(args) -> int:
    t = _fabric(args)
    tables = None
    if args.with_table:
        table = build_table(t.params.N)
        if t.stage is not Stage.CLASSICAL:
            table = factorize_table(table, t.params.n, t.params.r)
        tables = {"connectivity": render_table(table, "csv")}
    _emit(dumps(export_document(t, tables=tables)), args.output)
    return EXIT_OK


def cmd_import(args) -> int:
    t = import_document(json.loads(Path(args.file).read_text()))
    problems = validate_topology(t)
    census = t.census()
    print(f"{t.stage.value} fabric N={t.params.N} n={t.params.n} r={t.params.r} "
          f"w={t.params.w}: {len(t.nodes)} nodes, {len(t.edges)} fibers "
          f"({t.stage_fiber_count} stage fibers)")
    for (kind, fan_in, fan_out), count in sorted(census.items()):
        print(f"  {count:5d} x {kind.value} {fan_in}x{fan_out}")
    for problem in problems:
        print(f"violation: {problem}")
    if args.reexport:
        _emit(dumps(export_document(t)), args.reexport)
    return EXIT_COUNTEREXAMPLE if problems else EXIT_OK


def cmd_table(args) -> int:
    N, n, r = _size(args)
    table = build_table(N)
    if args.n is not None or args.r is not None:
        table = factorize_table(table, n, r)
    _emit(render_table(table, args.format), args.output)
    return EXIT_OK


def cmd_route(args) -> int:
    t = _fabric(args)
    path = resolve_path(t, ConnectionRequest(_end(args.p), _end(args.q), args.wavelength))
    print("\n".join(format_trace(t, path, inner=args.inner)))
    return EXIT_OK


def cmd_setup_script(args) -> int:
    t = _fabric(args)
    state = WavelengthState(t)
    rejected = contention = 0
    for lineno, line in enumerate(Path(args.file).read_text().splitlines(), 1):
        try:
            parsed = parse_request_line(line)
        except ValueError as exc:
            raise UsageError(f"{args.file}:{lineno}: {exc}") from exc
        if parsed is None:
            continue
        src, dst, wavelength = parsed
        try:
            cid = state.setup(ConnectionRequest(src, dst, wavelength))
        except WavelengthBusyAtEndpoint as exc:
            rejected += 1
            print(f"{lineno}: rejected: {exc}")
            continue
        except InternalContention as exc:
            contention += 1
            print(f"{lineno}: INTERNAL CONTENTION: {exc}")
            continue
        path = state.connections[cid]
        print(f"{lineno}: connection {cid}: R({path.p},{path.q},{wavelength}) "
              f"via {len(path.edges)} fibers")
    print(f"{len(state.connections)} active, {rejected} rejected, {contention} contention")
    return EXIT_COUNTEREXAMPLE if contention else EXIT_OK


def cmd_verify(args) -> int:
    t = _fabric(args)
    failed = False
    if t.stage is not Stage.CLASSICAL:
        verdict = check_equivalence(build_modular_shuffle(t.params.n, t.params.r),
                                    t.params.n, t.params.r)
        print(f"shuffle equivalence ({t.params.n}x{t.params.r}): "
              f"{'ok' if verdict.ok else 'FAILED'}")
        failed |= not verdict.ok
    problems = validate_topology(t)
    for problem in problems:
        print(f"violation: {problem}")
    report = verify_nonblocking(t, mode=args.mode, budget=args.budget, seed=args.seed)
    print(report.summary())
    for cx in report.counterexamples:
        print(f"  {cx}")
    failed |= bool(problems) or not report.ok
    return EXIT_COUNTEREXAMPLE if failed else EXIT_OK


def cmd_metrics(args) -> int:
    N, n, r = _size(args)
    params = FabricParams(N, n, r)
    classical = cabling_report(params, fabric_kind="classical")
    modular = cabling_report(params, sealed=not args.unsealed)
    census = component_census(params)
    wss_only = loss_budget("modular", n, r, per_wss_loss_db=args.per_wss_loss)
    coupler = loss_budget("modular", n, r, coupler_input=True, per_wss_loss_db=args.per_wss_loss)
    classical_loss = loss_budget("classical", n, r, per_wss_loss_db=args.per_wss_loss)
    doc = {
        "params": {"N": N, "n": n, "r": r},
        "cabling": {"classical": classical.as_dict(), "modular": modular.as_dict()},
        "census": {
            "inputWss": census.input_wss, "inputWssSize": f"1x{census.input_port_count}",
            "oxcModules": census.oxc_modules, "moduleSize": f"{r}x{r}",
            "outputWss": census.output_wss, "outputWssSize": f"{census.output_port_count}x1",
        },
        "loss": {
            "classical": classical_loss.as_dict(),
            "modular": wss_only.as_dict(),
            "modularCouplerInput": coupler.as_dict(),
            "couplerDeltaDb": coupler_loss_db(n) - args.per_wss_loss,
        },
    }
    if args.format in ("json", "both"):
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if args.format in ("table", "both"):
        rows = [
            ("stage fibers", classical.stage_fibers, modular.stage_fibers),
            ("external cables", classical.total_external_cables,
             modular.total_external_cables),
            ("ratio to classical", "1", str(modular.ratio_to_classical)),
            ("insertion loss (dB)", f"{classical_loss.total_db:.2f}*",
             f"{wss_only.total_db:.2f}"),
            ("with 1xn coupler (dB)", "-", f"{coupler.total_db:.2f}"),
        ]
        print(f"{'':24}{'classical':>12}{'modular':>12}")
        for name, left, right in rows:
            print(f"{name:24}{str(left):>12}{str(right):>12}")
        print(f"components: {census.input_wss} x 1x{n} WSS, {census.oxc_modules} x "
              f"{r}x{r} OXC, {census.output_wss} x {n}x1 WSS")
        print("* classical loss is derived (two WSS stages)")
    return EXIT_OK


def cmd_export_dot(args) -> int:
    _emit(render_dot(_fabric(args)), args.output)
    return EXIT_OK


def _fabric_args(p: argparse.ArgumentParser, allow_file: bool = True) -> None:
    if allow_file:
        p.add_argument("--fabric", help="exported fabric document (JSON)")
    p.add_argument("--N", type=int, help="port count (classical when given alone)")
    p.add_argument("--n", type=int, help="outer factor")
    p.add_argument("--r", type=int, help="inner factor")
    p.add_argument("--w", type=int, default=1, help="wavelengths per fiber")
    p.add_argument("--stage", choices=sorted(_STAGES))
    p.add_argument("--sealed", action="store_true", help="opaque OXC modules")
    p.add_argument("--coupler-input", action="store_true",
                   help="1xn couplers instead of 1xn WSSs at the input")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="modoxc", description="Modular WSS-based OXC toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build", help="emit a fabric as a JSON document")
    _fabric_args(p, allow_file=False)
    p.add_argument("--with-table", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("import", help="load and validate a fabric document")
    p.add_argument("file")
    p.add_argument("--reexport", metavar="FILE")
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("table", help="render a connectivity table")
    p.add_argument("--N", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--format", choices=["pretty", "csv"], default="pretty")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("route", help="print the self-routing trace of one request")
    _fabric_args(p)
    p.add_argument("--p", required=True, help="input: flat index or a,p'")
    p.add_argument("--q", required=True, help="output: flat index or b,q'")
    p.add_argument("--wavelength", "--lambda", type=int, default=0)
    p.add_argument("--inner", action="store_true", help="show hops inside modules")
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("setup-script", help="set up a batch of requests from a file")
    _fabric_args(p)
    p.add_argument("file", help="one request per line: 'p q lambda' or '(a,p') (b,q') lambda'")
    p.set_defaults(func=cmd_setup_script)

    p = sub.add_parser("verify", help="check shuffle equivalence and nonblocking routing")
    _fabric_args(p)
    p.add_argument("--mode", choices=["exhaustive", "randomized"], default="exhaustive")
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("metrics", help="cabling, census and loss figures")
    p.add_argument("--N", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--unsealed", action="store_true",
                   help="count module-internal fibers as cables")
    p.add_argument("--per-wss-loss", type=float, default=5.0)
    p.add_argument("--format", choices=["json", "table", "both"], default="both")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("export-dot", help="Graphviz rendering of a fabric")
    _fabric_args(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export_dot)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, AddressError, RoutingError, ValueError, KeyError, OSError) as exc:
        print(f"modoxc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
