"""Command-line interface: ``hcminimax {certify,sure-curve,simulate,newton}``.

Exit codes: 0 success (for ``certify``: certified), 2 certification not
reached, 1 on any error.  Certificates are JSON, tables are CSV; both go to
``--out`` or stdout as UTF-8.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .certify import Certificate, Status, cardano_min, certify_params
from .interval import Interval, newton_iterates
from .sim import Estimator, mc_risk, sure_curve
from .sure_risk import PriorConfig

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_ERROR, EXIT_NOT_CERTIFIED = 0, 1, 2


# ---------------------------------------------------------------------------
# certificate document
# ---------------------------------------------------------------------------


def _num(x: float) -> Optional[float]:
    return None if math.isinf(x) else x


def _real(x: Fraction) -> float:
    return float(x)


@dataclass(frozen=True)
class BranchRecord:
    name: str
    margin_lo: float
    margin_hi: float
    window: Optional[list]


@dataclass(frozen=True)
class ArtifactRecord:
    domain_lo: Optional[float]
    domain_hi: Optional[float]
    splits: int
    min_lo: float


@dataclass(frozen=True)
class CertificateDocument:
    schema_version: str
    p: int
    a: float
    b: float
    status: str
    branches: tuple[BranchRecord, ...]
    positivity_artifacts: tuple[ArtifactRecord, ...]
    tool_version: str
    timestamp: Optional[str]
    notes: tuple[str, ...] = ()

    @classmethod
    def from_certificate(cls, cert: Certificate, timestamp: Optional[str] = None) -> "CertificateDocument":
        branches = tuple(
            BranchRecord(name, m.lo, m.hi, list(window) if window else None)
            for name, m, window in cert.margins()
        )
        leaves = []
        for art in cert.artifacts:
            for part in art.parts or (art,):
                leaves.append(
                    ArtifactRecord(
                        _num(part.domain.lo), _num(part.domain.hi), part.splits,
                        part.min_enclosure.lo,
                    )
                )
        return cls(
            SCHEMA_VERSION, cert.p, _real(cert.a), _real(cert.b), cert.status.value,
            branches, tuple(leaves), __version__, timestamp, tuple(cert.notes),
        )

    def to_json(self) -> str:
        doc = asdict(self)
        doc["branches"] = [dict(b) for b in doc["branches"]]
        doc["positivity_artifacts"] = [dict(a) for a in doc["positivity_artifacts"]]
        doc["notes"] = list(doc["notes"])
        return json.dumps(doc, indent=2, allow_nan=False, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CertificateDocument":
        doc = json.loads(text)
        doc["branches"] = tuple(BranchRecord(**b) for b in doc["branches"])
        doc["positivity_artifacts"] = tuple(ArtifactRecord(**a) for a in doc["positivity_artifacts"])
        doc["notes"] = tuple(doc.get("notes", ()))
        return cls(**doc)


def _timestamp(stamp: bool) -> Optional[str]:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        secs = int(epoch)
    elif stamp:
        secs = int(time.time())
    else:
        return None
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(secs))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _g17(x: float) -> str:
    return format(x, ".17g")


def cmd_certify(args) -> int:
    cert = certify_params(args.p, args.a, args.b)
    doc = CertificateDocument.from_certificate(cert, _timestamp(args.stamp))
    _emit(doc.to_json(), args.out)
    return EXIT_OK if cert.status is Status.MINIMAX_CERTIFIED else EXIT_NOT_CERTIFIED


def cmd_sure_curve(args) -> int:
    cfg = PriorConfig(args.p, Fraction(args.a), Fraction(args.b))
    rows = sure_curve(cfg, args.w_max, args.steps)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["w", "delta_lo", "delta_hi", "risk_lo", "risk_hi"])
    for r in rows:
        writer.writerow([_g17(v) for v in (r.w, r.delta.lo, r.delta.hi, r.risk.lo, r.risk.hi)])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = PriorConfig(args.p, Fraction(args.a), Fraction(args.b))
    norms = [float(x) for x in args.beta_norms.split(",") if x.strip()]
    tags = [Estimator.parse(x) for x in args.estimators.split(",") if x.strip()]
    if not norms or not tags:
        raise ValueError("need at least one beta norm and one estimator")
    if any(r < 0 for r in norms):
        raise ValueError("beta norms must be nonnegative")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["estimator", "beta_norm", "n", "risk", "stderr", "sure_mean"])
    for tag in tags:
        for r in norms:
            beta = np.zeros(cfg.p)
            beta[0] = r
            pt = mc_risk(cfg, beta, args.samples, args.seed, tag)
            writer.writerow([
                tag.value, _g17(pt.beta_norm), pt.n_samples,
                _g17(pt.empirical_risk), _g17(pt.std_err), _g17(pt.sure_mean),
            ])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _demo(name: str):
    if name == "sqrt2":
        return (
            lambda x: x * x - 2,
            lambda x: 2 * x,
            Interval(1.0, 2.0),
            "root of x^2 - 2",
            None,
        )
    if name == "cardano":
        prob = cardano_min(1, 2)
        return prob.dF, prob.d2F, Interval(1.5, 4.0), "zero of F'(x), gamma2=1, gamma4=2", prob.x_star
    raise ValueError(f"unknown demo {name!r}")


def cmd_newton(args) -> int:
    f, df, bracket, title, reference = _demo(args.demo)
    lines = [f"# interval Newton: {title} on [{_g17(bracket.lo)}, {_g17(bracket.hi)}]",
             f"{'i':>3}  {'l':>24}  {'u':>24}  {'width':>12}"]
    final = bracket
    for i, box in newton_iterates(f, df, bracket, args.max_iter):
        final = box
        lines.append(f"{i:>3}  {_g17(box.lo):>24}  {_g17(box.hi):>24}  {box.width:>12.3e}")
    lines.append(f"enclosure [{_g17(final.lo)}, {_g17(final.hi)}] width {final.width:.3e}")
    if reference is not None:
        lines.append(f"closed form [{_g17(reference.lo)}, {_g17(reference.hi)}]")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _fraction(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a real number: {text!r}") from None
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_ERROR)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hcminimax", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def prior_flags(p, require_p=True):
        p.add_argument("--p", type=_positive_int, required=require_p)
        p.add_argument("--a", type=_fraction, default=Fraction(1, 2))
        p.add_argument("--b", type=_fraction, default=Fraction(1, 2))
        p.add_argument("--out", default=None)

    c = sub.add_parser("certify", help="certify minimaxity of the Bayes estimator")
    prior_flags(c)
    c.add_argument("--stamp", action="store_true", help="record the current UTC time")
    c.set_defaults(func=cmd_certify)

    s = sub.add_parser("sure-curve", help="tabulate Delta(w) and the risk estimate")
    prior_flags(s)
    s.add_argument("--w-max", type=float, default=60.0)
    s.add_argument("--steps", type=int, default=121)
    s.set_defaults(func=cmd_sure_curve)

    m = sub.add_parser("simulate", help="Monte-Carlo risk curves")
    prior_flags(m)
    m.add_argument("--beta-norms", default="0,1,2,5,10,20")
    m.add_argument("--samples", type=_positive_int, default=100_000)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--estimators", default="half_cauchy,james_stein,identity")
    m.set_defaults(func=cmd_simulate)

    n = sub.add_parser("newton", help="interval Newton demonstration")
    n.add_argument("--demo", choices=["sqrt2", "cardano"], required=True)
    n.add_argument("--max-iter", type=_positive_int, default=100)
    n.add_argument("--out", default=None)
    n.set_defaults(func=cmd_newton)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # every failure maps to exit 1
        sys.stderr.write(f"hcminimax {args.command}: error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
