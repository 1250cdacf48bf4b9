"""Command-line front end.

Exit codes: 0 pass, 1 invalid input or flags, 2 computation error, 3 a
check ran and failed.
"""

from __future__ import annotations

import argparse
import itertools
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import mpmath

from .degeneration import (
    DEFAULT_SCHEDULE,
    ExactOrbit,
    RealConfig,
    convergence_check,
    limit_table,
    orientation_compare,
    oriented_approximation_check,
    rows_to_csv,
)
from .errors import LambdaTreesError, ParseError, ValidationError
from .field import using_config
from .hplane import ORIGIN
from .lambda_tree import check_four_point, tripod_orientation
from .rep_actions import (
    available_families,
    family_path,
    load_representation,
    min_vector_defect,
    minimal_subtree_sample,
    orbit_sample,
    trace_length,
    translation_length,
)

EXIT_OK, EXIT_VALIDATION, EXIT_COMPUTATION, EXIT_CHECK = 0, 1, 2, 3


@dataclass
class RunSpec:
    """Validated command line.

    Built from the parsed arguments before any computation starts; every
    command reads its settings from here.
    """

    command: str
    input: str
    horizon: int = 24
    radius: int = 2
    t_schedule: tuple = DEFAULT_SCHEDULE
    epsilon: float | None = None
    q_radius: int = 2
    precision: int = 512
    out: Path | None = None
    normalize: str | None = None
    extra: dict = field(default_factory=dict)

    _CORE = ("command", "input", "horizon", "radius", "t_schedule", "epsilon",
             "q_radius", "precision", "out", "normalize")

    @classmethod
    def from_args(cls, args):
        values = vars(args)
        core = {k: values[k] for k in cls._CORE if k in values}
        extra = {k: v for k, v in values.items() if k not in cls._CORE}
        run = cls(**core, extra=extra)
        if run.epsilon is not None and run.epsilon < 0:
            raise ValidationError("epsilon must be nonnegative")
        return run

    def __getattr__(self, name):
        try:
            return self.__dict__["extra"][name]
        except KeyError:
            raise AttributeError(name) from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _rational_in_unit_interval(text):
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"not a rational number: {text!r}") from exc
    if not 0 < value < 1:
        raise ValidationError(f"t = {text} is not in (0, 1)")
    return value


def _schedule(text):
    values = tuple(_rational_in_unit_interval(x) for x in text.split(",") if x.strip())
    if not values:
        raise ValidationError("empty t-schedule")
    if any(a <= b for a, b in zip(values, values[1:])):
        raise ValidationError("t-schedule must be strictly decreasing")
    return values


def _positive_int(name):
    def conv(text):
        try:
            value = int(text)
        except ValueError as exc:
            raise ValidationError(f"{name} must be an integer") from exc
        if value < 0 or (name in ("horizon", "precision") and value == 0):
            raise ValidationError(f"{name} must be positive")
        return value

    return conv


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("input", help="representation file, or the name of a shipped family")
    common.add_argument("--horizon", type=_positive_int("horizon"), default=24,
                        help="series truncation horizon, in exponent steps above the valuation")
    common.add_argument("--normalize", choices=["sqrt"], default=None,
                        help="divide matrices by the square root of their determinant")
    common.add_argument("--out", type=Path, default=None, help="write the main output here")

    parser = _Parser(prog="lambdatrees", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", parents=[common], help="validate input and run the four-point check")
    p.add_argument("--radius", type=_positive_int("radius"), default=2)

    p = sub.add_parser("tlen", parents=[common], help="translation length of a word")
    p.add_argument("word", nargs="+", help="word tokens, e.g. a b^-1 (joined by spaces)")

    p = sub.add_parser("tree", parents=[common], help="export the sampled oriented subtree")
    p.add_argument("--radius", type=_positive_int("radius"), default=2)
    p.add_argument("--dot", type=Path, default=None, help="also write a DOT rendering")

    p = sub.add_parser("orient", parents=[common], help="exact orientation of the tripod of three orbit points")
    p.add_argument("words", nargs=3)

    p = sub.add_parser("limit", parents=[common], help="limit tables against small real t (CSV)")
    p.add_argument("--radius", type=_positive_int("radius"), default=2)
    p.add_argument("--t-schedule", type=_schedule, default=DEFAULT_SCHEDULE)
    p.add_argument("--precision", type=_positive_int("precision"), default=512)
    p.add_argument("--epsilon", type=float, default=None,
                   help="also run the oriented epsilon-approximation check")
    p.add_argument("--q-radius", type=_positive_int("q-radius"), default=2)
    p.add_argument("--approx-t", type=_rational_in_unit_interval, default=Fraction(1, 10**6))
    p.add_argument("--orient-below", type=_rational_in_unit_interval, default=Fraction(1, 10**4),
                   help="orientation signs must agree for every schedule t at or below this")
    p.add_argument("--pairs", default=None,
                   help="'w1,w2;w3,w4' word pairs (default: all pairs at --radius)")
    p.add_argument("--tripods", default=None,
                   help="'w1,w2,w3;...' word triples (default: all triples at radius 1)")

    p = sub.add_parser("defect", parents=[common], help="minimal-vector defect at t0")
    p.add_argument("t0", type=_rational_in_unit_interval)
    return parser


def _load(args):
    path = Path(args.input)
    if not path.exists() and args.input in available_families():
        path = family_path(args.input)
    if not path.is_file():
        known = ", ".join(available_families())
        raise ValidationError(f"no such file or shipped family: {args.input} (shipped: {known})")
    return load_representation(path, normalize=args.normalize)


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _word_groups(rep, text, size):
    groups = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        words = [rep.word(w) for w in chunk.split(",")]
        if len(words) != size:
            raise ValidationError(f"expected {size} words in {chunk!r}")
        groups.append(tuple(words))
    return groups


def cmd_check(args):
    rep = _load(args)
    points = orbit_sample(rep, args.radius, ORIGIN)
    if len(points) < 4:
        print(f"{len(points)} distinct tree points; four-point check needs 4 (trivially tree-like)")
        return EXIT_OK
    report = check_four_point(points)
    print(f"generators: {', '.join(rep.names)} (determinant 1)")
    print(f"sample: {report.n_points} tree points, {report.n_quadruples} quadruples")
    print(f"four-point violations: {len(report.violations)}")
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_tlen(args):
    rep = _load(args)
    word = rep.word(" ".join(args.word))
    ell = translation_length(rep, word)
    cross = trace_length(rep, word)
    agree = "agrees" if ell == cross else "DISAGREES"
    _emit(f"{ell}\n", args.out)
    print(f"trace cross-check: {cross} ({agree})", file=sys.stderr)
    return EXIT_OK if ell == cross else EXIT_CHECK


def cmd_tree(args):
    rep = _load(args)
    tree = minimal_subtree_sample(rep, args.radius)
    _emit(tree.to_text(), args.out)
    if args.dot is not None:
        args.dot.write_text(tree.to_dot())
    return EXIT_OK


def cmd_orient(args):
    rep = _load(args)
    orbit = ExactOrbit(rep)
    points = [orbit.point(rep.word(w)) for w in args.words]
    sign = tripod_orientation(*points)
    _emit(f"{sign:+d}\n" if sign else "0\n", args.out)
    return EXIT_OK


def cmd_limit(args):
    rep = _load(args)
    config = RealConfig(
        schedule=args.t_schedule,
        precision=args.precision,
        epsilon=args.epsilon if args.epsilon is not None else 0.05,
        q_radius=args.q_radius,
    )
    words = rep.words(args.radius)
    if args.pairs is None:
        pairs = list(itertools.combinations(words, 2))
    else:
        pairs = _word_groups(rep, args.pairs, 2)
    if args.tripods is None:
        tripods = list(itertools.combinations(rep.words(min(args.radius, 1)), 3))
    else:
        tripods = _word_groups(rep, args.tripods, 3)
    rows = limit_table(rep, pairs, config)
    orient = orientation_compare(rep, tripods, config)
    _emit(rows_to_csv(rows + orient.rows), args.out)

    ok = True
    if len(config.schedule) >= 3 and pairs:
        conv = convergence_check(rows)
        print(f"convergence (gap <= C/ln(1/t), slack 1.5): {len(conv.failures)} failures", file=sys.stderr)
        ok &= conv.passed
    late = orient.disagreements_below(args.orient_below)
    print(f"orientation disagreements for t <= {args.orient_below}: {len(late)}"
          f" ({len(orient.degenerate)} degenerate tripods skipped)", file=sys.stderr)
    ok &= not late
    if args.epsilon is not None:
        ball = rep.words(args.radius)
        qball = rep.words(args.q_radius)
        res = oriented_approximation_check(rep, args.approx_t, ball, qball, args.epsilon, config)
        print(f"oriented approximation at t = {args.approx_t}, eps = {args.epsilon}:"
              f" {'pass' if res.ok else 'FAIL'} (max gap {res.max_gap:.6g},"
              f" {res.tripods_checked} tripods)", file=sys.stderr)
        ok &= res.ok
    return EXIT_OK if ok else EXIT_CHECK


def cmd_defect(args):
    rep = _load(args)
    value = min_vector_defect(rep, args.t0)
    _emit(f"{mpmath.nstr(value, 12)}\n", args.out)
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "tlen": cmd_tlen,
    "tree": cmd_tree,
    "orient": cmd_orient,
    "limit": cmd_limit,
    "defect": cmd_defect,
}


def main(argv=None):
    try:
        args = RunSpec.from_args(build_parser().parse_args(argv))
        with using_config(relative_steps=args.horizon):
            return COMMANDS[args.command](args)
    except (ValidationError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except LambdaTreesError as exc:
        print(f"computation error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_COMPUTATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
