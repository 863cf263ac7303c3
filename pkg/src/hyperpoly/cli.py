"""Command-line interface.

One binary with subcommands wrapping every public operation, seeded
generators, and the batch experiment suites.  Reports go to stdout (JSON by
default, or plain text), diagnostics to stderr.  Exit codes: 0 success or
property holds, 1 definite negative, 2 malformed input, 3 undetermined or
inconclusive.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import experiments
from .errors import (
    BudgetExceededError,
    DegenerateDirectionError,
    DimensionMismatchError,
    GenerationError,
    HyperpolyError,
    InvalidDocumentError,
    NonRealRootError,
    ZeroCapacityError,
)
from .generators import GeneratorSpec, generate_document, matrix_tuple_points, symmetric_matrix_oracle
from .interlace import (
    HYPERBOLIC,
    INCONCLUSIVE,
    NOT_HYPERBOLIC,
    MonicPolynomial,
    derivative_line_convexity,
    lidskii_check,
    majorization_check,
    obreschkoff_pair_test,
    sampled_pencil_test,
    shifted_pencil_majorization,
    symmetric_convex_line_check,
)
from .mixed import alexandrov_fenchel_terms, mixed_value, newton_saturation_check
from .oracle import evaluate, oracle_from_json, roots_in_direction, trace_in_direction
from .scaling import (
    STATUS_CONVERGED,
    STATUS_ZERO,
    VERDICT_POSITIVE,
    VERDICT_ZERO,
    capacity,
    edmonds_rado_check,
    sinkhorn_iteration,
)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_UNDETERMINED = 3


@dataclass(frozen=True)
class RunConfig:
    seed: int
    tol: float
    max_iters: int
    output_format: str
    parallelism: int

    def __post_init__(self):
        if self.tol <= 0:
            raise InvalidDocumentError("tol must be positive")
        if self.max_iters < 1:
            raise InvalidDocumentError("max-iters must be at least 1")


def _env(name: str, cast, default):
    raw = os.environ.get(f"HYPERPOLY_{name}")
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError as exc:
        raise InvalidDocumentError(f"bad HYPERPOLY_{name}={raw!r}: {exc}") from exc


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidDocumentError(f"cannot read {path}: {exc}") from exc


def _load_oracle(path: str):
    doc = _load_json(path)
    if isinstance(doc, dict) and doc.get("kind") == "symmetric":
        return symmetric_matrix_oracle(int(doc["n"]))
    return oracle_from_json(doc)


def _load_point(path: str) -> np.ndarray:
    doc = _load_json(path)
    if isinstance(doc, dict) and "point" in doc:
        doc = doc["point"]
    if not isinstance(doc, list):
        raise InvalidDocumentError(f"{path}: a point document is a JSON array of numbers")
    return np.asarray(doc, dtype=float)


def _load_tuple(path: str, oracle):
    doc = _load_json(path)
    if isinstance(doc, dict) and "points" in doc:
        pts = np.asarray(doc["points"], dtype=float)
        if pts.ndim != 2:
            raise InvalidDocumentError(f"{path}: 'points' must be a 2-d array")
        return oracle, pts
    if isinstance(doc, dict) and "matrices" in doc:
        mat_oracle, pts = matrix_tuple_points(doc["matrices"])
        if oracle is None:
            return mat_oracle, pts
        # Matrix coordinates only make sense against the symmetric-basis pencil.
        same = (
            oracle.kind == mat_oracle.kind
            and oracle.m == mat_oracle.m
            and oracle.n == mat_oracle.n
            and np.max(np.abs(oracle.form.pencil - mat_oracle.form.pencil)) <= 1e-12
        )
        if not same:
            raise InvalidDocumentError(
                f"{path}: matrix tuples pair with the symmetric-basis oracle "
                f'({{"kind": "symmetric", "n": {mat_oracle.n}}})'
            )
        return oracle, pts
    raise InvalidDocumentError(f"{path}: tuple document needs a 'points' or 'matrices' field")


def _load_pair(path: str) -> tuple[MonicPolynomial, MonicPolynomial]:
    doc = _load_json(path)
    if not isinstance(doc, dict) or "q" not in doc or "r" not in doc:
        raise InvalidDocumentError(f"{path}: pair document needs 'q' and 'r' fields")
    return MonicPolynomial.from_json(doc["q"]), MonicPolynomial.from_json(doc["r"])


def _parse_grid(spec: str) -> np.ndarray:
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise InvalidDocumentError("grid must be 'start:stop:step' or comma-separated values")
        start, stop, step = (float(v) for v in parts)
        return np.round(np.arange(start, stop + 1e-12, step), 12)
    return np.asarray([float(v) for v in spec.split(",")], dtype=float)


def _emit(report: dict, config: RunConfig, out_path: str | None) -> None:
    if config.output_format == "json":
        text = json.dumps(report, sort_keys=True)
    else:
        lines = []
        for key in sorted(report):
            value = report[key]
            if isinstance(value, (dict, list)):
                value = json.dumps(value, sort_keys=True)
            lines.append(f"{key}: {value}")
        text = "\n".join(lines)
    print(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def cmd_eval(ns, config: RunConfig) -> tuple[int, dict]:
    oracle = _load_oracle(ns.oracle)
    value = evaluate(oracle, _load_point(ns.point))
    return EXIT_OK, {"value": value}


def cmd_roots(ns, config: RunConfig) -> tuple[int, dict]:
    oracle = _load_oracle(ns.oracle)
    x = _load_point(ns.point)
    d = _load_point(ns.direction) if ns.direction else oracle.direction
    lam = roots_in_direction(oracle, x, d, tol=config.tol)
    return EXIT_OK, {"roots": [float(v) for v in lam]}


def cmd_trace(ns, config: RunConfig) -> tuple[int, dict]:
    oracle = _load_oracle(ns.oracle)
    x = _load_point(ns.point)
    d = _load_point(ns.direction) if ns.direction else oracle.direction
    return EXIT_OK, {"trace": trace_in_direction(oracle, x, d)}


def cmd_mixed(ns, config: RunConfig) -> tuple[int, dict]:
    oracle = _load_oracle(ns.oracle)
    oracle, pts = _load_tuple(ns.tuple, oracle)
    if oracle.n >= 15:
        print(f"note: polarizing over 2^{oracle.n} sign vectors", file=sys.stderr)
    return EXIT_OK, {"mixed_value": mixed_value(oracle, pts)}


def cmd_support(ns, config: RunConfig) -> tuple[int, dict]:
    oracle = _load_oracle(ns.oracle)
    oracle, pts = _load_tuple(ns.tuple, oracle)
    report = newton_saturation_check(oracle, pts)
    code = EXIT_OK if report.saturated else EXIT_NEGATIVE
    return code, report.to_json()


def cmd_af(ns, config: RunConfig) -> tuple[int, dict]:
    oracle = _load_oracle(ns.oracle)
    oracle, pts = _load_tuple(ns.tuple, oracle)
    m_ab, m_aa, m_bb = alexandrov_fenchel_terms(oracle, pts)
    residual = m_ab * m_ab - m_aa * m_bb
    scale = max(1.0, m_ab * m_ab, abs(m_aa * m_bb))
    holds = residual >= -1e-9 * scale
    report = {"residual": residual, "scale": scale, "holds": bool(holds)}
    return (EXIT_OK if holds else EXIT_NEGATIVE), report


def cmd_sinkhorn(ns, config: RunConfig) -> tuple[int, dict]:
    oracle = _load_oracle(ns.oracle)
    oracle, pts = _load_tuple(ns.tuple, oracle)
    report = sinkhorn_iteration(oracle, pts, max_iters=config.max_iters, threshold=ns.threshold)
    if report.capacity_verdict == VERDICT_POSITIVE and report.converged:
        code = EXIT_OK
    elif report.capacity_verdict == VERDICT_ZERO:
        code = EXIT_NEGATIVE
    else:
        code = EXIT_UNDETERMINED
    return code, report.to_json()


def cmd_capacity(ns, config: RunConfig) -> tuple[int, dict]:
    oracle = _load_oracle(ns.oracle)
    oracle, pts = _load_tuple(ns.tuple, oracle)
    result = capacity(oracle, pts, tol=config.tol, max_iters=config.max_iters)
    if result.status == STATUS_CONVERGED:
        code = EXIT_OK
    elif result.status == STATUS_ZERO:
        code = EXIT_NEGATIVE
    else:
        code = EXIT_UNDETERMINED
    return code, result.to_json()


def cmd_edmonds_rado(ns, config: RunConfig) -> tuple[int, dict]:
    oracle = _load_oracle(ns.oracle)
    oracle, pts = _load_tuple(ns.tuple, oracle)
    report = edmonds_rado_check(oracle, pts, tol=config.tol)
    return (EXIT_OK if report.holds else EXIT_NEGATIVE), report.to_json()


def cmd_pair_test(ns, config: RunConfig) -> tuple[int, dict]:
    q, r = _load_pair(ns.pair)
    first = obreschkoff_pair_test(q, r, tol=config.tol)
    second = sampled_pencil_test(q, r, num_dirs=ns.num_dirs, tol=config.tol)
    definite = (HYPERBOLIC, NOT_HYPERBOLIC)
    agree = first.verdict == second.verdict or not (
        first.verdict in definite and second.verdict in definite
    )
    report = {"obreschkoff": first.to_json(), "sampled": second.to_json(), "agree": agree}
    if first.verdict == second.verdict and first.verdict in (HYPERBOLIC, NOT_HYPERBOLIC):
        verdict = first.verdict
    elif second.verdict == NOT_HYPERBOLIC or first.verdict == NOT_HYPERBOLIC:
        # A found counterexample (or mixed residues) is decisive even if the
        # other route could not commit.
        verdict = NOT_HYPERBOLIC if first.verdict != HYPERBOLIC else INCONCLUSIVE
    else:
        verdict = INCONCLUSIVE
    report["verdict"] = verdict
    if verdict == HYPERBOLIC:
        return EXIT_OK, report
    if verdict == NOT_HYPERBOLIC:
        return EXIT_NEGATIVE, report
    return EXIT_UNDETERMINED, report


def cmd_majorize(ns, config: RunConfig) -> tuple[int, dict]:
    doc = _load_json(ns.file)
    if ns.mode == "vectors":
        report = majorization_check(doc["u"], doc["v"], tol=config.tol)
    elif ns.mode == "lidskii":
        report = lidskii_check(np.asarray(doc["A"], float), np.asarray(doc["B"], float), tol=config.tol)
    else:
        q = MonicPolynomial.from_json(doc["q"])
        r = MonicPolynomial.from_json(doc["r"])
        report = shifted_pencil_majorization(q, r, doc["point"], doc["delta"], tol=config.tol)
    return (EXIT_OK if report.majorized else EXIT_NEGATIVE), report.to_json()


def cmd_line_convexity(ns, config: RunConfig) -> tuple[int, dict]:
    grid = _parse_grid(ns.grid)
    doc = _load_json(ns.file)
    if ns.check == "derivative":
        q = MonicPolynomial.from_json(doc["q"])
        report = derivative_line_convexity(q, ns.b, ns.c, ns.k, grid, tol=config.tol)
        ok = report.convex and report.min_at_zero is not False and report.fn_constant
        return (EXIT_OK if ok else EXIT_NEGATIVE), report.to_json()
    q = MonicPolynomial.from_json(doc["q"])
    r = MonicPolynomial.from_json(doc["r"])
    try:
        report = symmetric_convex_line_check(q, r, ns.b, ns.c, ns.statistic, grid, tol=config.tol)
    except NonRealRootError as exc:
        return EXIT_NEGATIVE, {"convex": None, "verdict": "not_hyperbolic", "detail": str(exc)}
    return (EXIT_OK if report.convex else EXIT_NEGATIVE), report.to_json()


def cmd_gen(ns, config: RunConfig) -> tuple[int, dict]:
    spec = GeneratorSpec(kind=ns.kind, n=ns.n, params={})
    return EXIT_OK, generate_document(spec, config.seed)


def cmd_experiments(ns, config: RunConfig) -> tuple[int, dict]:
    try:
        summary = experiments.run_suite(ns.suite, config.seed, trials=ns.trials, parallelism=config.parallelism)
    except KeyError as exc:
        raise InvalidDocumentError(str(exc)) from exc
    return (EXIT_OK if summary["failures"] == 0 else EXIT_NEGATIVE), summary


def _add_common_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    def default(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--seed", type=int, default=default(_env("SEED", int, 0)))
    parser.add_argument("--tol", type=float, default=default(_env("TOL", float, 1e-8)))
    parser.add_argument("--max-iters", type=int, default=default(_env("MAX_ITERS", int, 10000)))
    parser.add_argument("--format", choices=("json", "text"), default=default(_env("FORMAT", str, "json")))
    parser.add_argument("--parallelism", type=int, default=default(_env("PARALLELISM", int, 1)))
    parser.add_argument("--out", default=default(None), help="also write the report to this file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyperpoly", description=__doc__)
    _add_common_options(parser, suppress=False)
    # The same options are accepted after the subcommand; values given there win.
    common = argparse.ArgumentParser(add_help=False)
    _add_common_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=argparse.ArgumentParser)

    p = sub.add_parser("eval", parents=[common], help="evaluate the polynomial at a point")
    p.add_argument("oracle")
    p.add_argument("point")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("roots", parents=[common], help="root spectrum of a point in a direction")
    p.add_argument("oracle")
    p.add_argument("point")
    p.add_argument("direction", nargs="?", default=None)
    p.set_defaults(fn=cmd_roots)

    p = sub.add_parser("trace", parents=[common], help="directional trace of a point")
    p.add_argument("oracle")
    p.add_argument("point")
    p.add_argument("direction", nargs="?", default=None)
    p.set_defaults(fn=cmd_trace)

    p = sub.add_parser("mixed", parents=[common], help="polarized mixed value of an n-point tuple")
    p.add_argument("oracle")
    p.add_argument("tuple")
    p.set_defaults(fn=cmd_mixed)

    p = sub.add_parser("support", parents=[common], help="support, Newton polytope saturation")
    p.add_argument("oracle")
    p.add_argument("tuple")
    p.set_defaults(fn=cmd_support)

    p = sub.add_parser("af", parents=[common], help="Alexandrov-Fenchel residual of a tuple")
    p.add_argument("oracle")
    p.add_argument("tuple")
    p.set_defaults(fn=cmd_af)

    p = sub.add_parser("sinkhorn", parents=[common], help="run the scaling iteration")
    p.add_argument("oracle")
    p.add_argument("tuple")
    p.add_argument("--threshold", type=float, default=1e-10)
    p.set_defaults(fn=cmd_sinkhorn)

    p = sub.add_parser("capacity", parents=[common], help="capacity of a tuple via convex optimization")
    p.add_argument("oracle")
    p.add_argument("tuple")
    p.set_defaults(fn=cmd_capacity)

    p = sub.add_parser("edmonds-rado", parents=[common], help="generalized rank condition over all subsets")
    p.add_argument("oracle")
    p.add_argument("tuple")
    p.set_defaults(fn=cmd_edmonds_rado)

    p = sub.add_parser("pair-test", parents=[common], help="hyperbolic pair test (residues + sampled pencil)")
    p.add_argument("pair")
    p.add_argument("--num-dirs", type=int, default=64)
    p.set_defaults(fn=cmd_pair_test)

    p = sub.add_parser("majorize", parents=[common], help="majorization checks")
    p.add_argument("file")
    p.add_argument("--mode", choices=("vectors", "lidskii", "shifted-pencil"), default="vectors")
    p.set_defaults(fn=cmd_majorize)

    p = sub.add_parser("line-convexity", parents=[common], help="convexity sweeps along polynomial lines")
    p.add_argument("file")
    p.add_argument("--check", choices=("derivative", "symmetric"), default="derivative")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--grid", default="-1:1:0.25")
    p.add_argument("--statistic", default="max")
    p.set_defaults(fn=cmd_line_convexity)

    p = sub.add_parser("gen", parents=[common], help="seeded instance generators")
    p.add_argument("--kind", required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("experiments", parents=[common], help="batch property suites")
    p.add_argument("suite")
    p.add_argument("--trials", type=int, default=None)
    p.set_defaults(fn=cmd_experiments)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        config = RunConfig(
            seed=ns.seed,
            tol=ns.tol,
            max_iters=ns.max_iters,
            output_format=ns.format,
            parallelism=ns.parallelism,
        )
        code, report = ns.fn(ns, config)
        _emit(report, config, ns.out)
        return code
    except NonRealRootError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except ZeroCapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except (
        InvalidDocumentError,
        DimensionMismatchError,
        DegenerateDirectionError,
        BudgetExceededError,
        GenerationError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except HyperpolyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
