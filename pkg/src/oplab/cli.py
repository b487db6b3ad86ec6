"""Command-line front end over the matrix JSON format.

Subcommands: classify, defect, drazin, transform, split, verify, fuzz.
Results are emitted as JSON (stdout or --output); diagnostics go to stderr.

Exit codes: 0 success / all conclusions hold, 1 usage error, 2 parse error,
3 numerical failure, 4 counterexample found (a premise-met instance whose
conclusion failed; the instance is quarantined for replay).

Weight sugar: ``--weight identity`` uses I, ``--weight gram --n k`` uses
T*^k T^k, anything else is read as a path to a matrix JSON file.  The
OPLAB_THREADS environment variable caps verify/fuzz parallelism.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .decompositions import (
    DecompositionError,
    aluthge,
    core_nilpotent,
    drazin_inverse,
    drazin_residuals,
    duggal,
    polar,
    range_kernel_split,
)
from .expansivity import DefectSpec, classify, defect, gram_weight
from .generators import GenerationError
from .matrix_core import (
    MatrixFormatError,
    NumericalFailureError,
    OplabError,
    Tolerance,
    matrix_from_json,
    matrix_to_json,
)
from .suite import THEOREM_IDS, default_workers, run_suite

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_NUMERICAL = 3
EXIT_COUNTEREXAMPLE = 4


class _Parser(argparse.ArgumentParser):
    # usage problems must exit 1; argparse defaults to 2 which is reserved
    # for parse errors on input files
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _load_matrix(path: str) -> np.ndarray:
    with open(path) as handle:
        payload = json.load(handle)
    return matrix_from_json(payload)


def _resolve_weight(spec: str, t: np.ndarray, n: int) -> np.ndarray:
    if spec == "identity":
        return np.eye(t.shape[0], dtype=np.complex128)
    if spec == "gram":
        return gram_weight(t, n)
    return _load_matrix(spec)


def _tolerance(args) -> Tolerance:
    return Tolerance(rel_eps=args.rel_eps, abs_eps=args.abs_eps)


def _emit(payload: dict, output: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2)
    if output:
        with open(output, "w") as handle:
            handle.write(text + "\n")
    else:
        print(text)


def _cmd_classify(args) -> int:
    t = _load_matrix(args.matrix)
    p = _resolve_weight(args.weight, t, args.n)
    report = classify(t, p, args.m_max, _tolerance(args))
    _emit(report.to_json(), args.output)
    return EXIT_OK


def _cmd_defect(args) -> int:
    t = _load_matrix(args.matrix)
    p = _resolve_weight(args.weight, t, args.n)
    result = defect(DefectSpec(t=t, p=p, m=args.m), _tolerance(args))
    _emit(result.to_json(), args.output)
    return EXIT_OK


def _cmd_drazin(args) -> int:
    t = _load_matrix(args.matrix)
    tol = _tolerance(args)
    core = core_nilpotent(t, tol)
    td = drazin_inverse(t, tol)
    _emit(
        {
            "index": core.index,
            "drazin_inverse": matrix_to_json(td),
            "residuals": drazin_residuals(t, td, core.index),
            "core": {
                "orthogonal": core.orthogonal,
                "invertible_dim": int(core.t1.shape[0]),
                "nilpotent_dim": int(core.t2.shape[0]),
            },
        },
        args.output,
    )
    return EXIT_OK


def _cmd_transform(args) -> int:
    t = _load_matrix(args.matrix)
    tol = _tolerance(args)
    parts = polar(t, tol)
    _emit(
        {
            "polar": {"u": matrix_to_json(parts.u), "p": matrix_to_json(parts.p)},
            "aluthge": matrix_to_json(aluthge(t, tol)),
            "duggal": matrix_to_json(duggal(t, tol)),
        },
        args.output,
    )
    return EXIT_OK


def _cmd_split(args) -> int:
    t = _load_matrix(args.matrix)
    split = range_kernel_split(t, args.n, _tolerance(args))
    _emit(
        {
            "d1": split.d1,
            "basis": matrix_to_json(split.basis),
            "power_blocks": {"t1n": matrix_to_json(split.t1n), "x": matrix_to_json(split.x)},
            "triangular_blocks": {
                "t1": matrix_to_json(split.t1),
                "coupling": matrix_to_json(split.coupling),
                "t2": matrix_to_json(split.t2),
            },
            "residuals": split.residuals,
        },
        args.output,
    )
    return EXIT_OK


def _parse_dims(text: str):
    try:
        d1, d2 = (int(part) for part in text.split(","))
    except ValueError:
        raise MatrixFormatError(f"--dims expects 'd1,d2', got {text!r}") from None
    if d1 < 1 or d2 < 1:
        raise MatrixFormatError(f"--dims components must be >= 1, got {text!r}")
    return d1, d2


def _cmd_suite(args, mode: str) -> int:
    suites = None if getattr(args, "suite", "all") == "all" else [args.suite]
    report = run_suite(
        mode,
        seed=args.seed,
        count=args.count,
        dims=_parse_dims(args.dims),
        suites=suites,
        tol=_tolerance(args),
        workers=default_workers(),
        quarantine_dir=args.quarantine,
    )
    _emit(report, args.output)
    if report["failures"] > 0:
        print(
            f"{report['failures']} premise-met failure(s); instances quarantined under {args.quarantine}",
            file=sys.stderr,
        )
        return EXIT_COUNTEREXAMPLE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rel-eps", type=float, default=Tolerance().rel_eps,
                        help="relative spectral tolerance (default %(default)s)")
    common.add_argument("--abs-eps", type=float, default=Tolerance().abs_eps,
                        help="absolute tolerance floor (default %(default)s)")
    common.add_argument("--output", help="write the JSON result here instead of stdout")

    weighted = argparse.ArgumentParser(add_help=False)
    weighted.add_argument("--weight", default="identity",
                          help="'identity', 'gram' (with --n), or a matrix JSON path")
    weighted.add_argument("--n", type=int, default=1,
                          help="power k for the gram weight T*^k T^k (default 1)")

    parser = _Parser(prog="oplab", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_classify = sub.add_parser("classify", parents=[common, weighted],
                                help="tabulate defect verdicts for m = 1..m_max")
    p_classify.add_argument("--matrix", required=True, help="operator matrix JSON file")
    p_classify.add_argument("--m-max", type=int, default=4, dest="m_max")
    p_classify.set_defaults(func=_cmd_classify)

    p_defect = sub.add_parser("defect", parents=[common, weighted],
                              help="compute one defect matrix with its verdict")
    p_defect.add_argument("--matrix", required=True)
    p_defect.add_argument("--m", type=int, default=1, help="defect order (default 1)")
    p_defect.set_defaults(func=_cmd_defect)

    p_drazin = sub.add_parser("drazin", parents=[common],
                              help="Drazin index and inverse with identity residuals")
    p_drazin.add_argument("--matrix", required=True)
    p_drazin.set_defaults(func=_cmd_drazin)

    p_transform = sub.add_parser("transform", parents=[common],
                                 help="polar factors and both polar-type transforms")
    p_transform.add_argument("--matrix", required=True)
    p_transform.set_defaults(func=_cmd_transform)

    p_split = sub.add_parser("split", parents=[common],
                             help="range-kernel splitting adapted to T^n")
    p_split.add_argument("--matrix", required=True)
    p_split.add_argument("--n", type=int, default=1, help="power defining the splitting")
    p_split.set_defaults(func=_cmd_split)

    for mode in ("verify", "fuzz"):
        p_mode = sub.add_parser(
            mode,
            parents=[common],
            help=(
                "run premise-certified theorem suites"
                if mode == "verify"
                else "run randomized instances hunting for counterexamples"
            ),
        )
        p_mode.add_argument("--suite", default="all", choices=("all",) + THEOREM_IDS)
        p_mode.add_argument("--seed", type=int, default=0)
        p_mode.add_argument("--count", type=int, default=25,
                            help="instances per theorem (default %(default)s)")
        p_mode.add_argument("--dims", default="4,3", help="fixture block dimensions 'd1,d2'")
        p_mode.add_argument("--quarantine", default="quarantine",
                            help="directory for counterexample files")
        p_mode.set_defaults(func=lambda args, mode=mode: _cmd_suite(args, mode))

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (MatrixFormatError, json.JSONDecodeError, OSError) as exc:
        print(f"oplab: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (NumericalFailureError, DecompositionError, GenerationError) as exc:
        print(f"oplab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OplabError as exc:
        print(f"oplab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"oplab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
