import argparse
import json
import logging
import os
import sys
import time
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from qha.data.loaders import load_algebra, load_sigma, module_from_spec
from qha.errors import (
    CapExceeded,
    HypothesisFailed,
    InvariantError,
    NotAdmissibleUpToCap,
    QhaError,
    ResolutionCapExceeded,
    ValidationError,
)
from qha.evaluation.regression import CORPUS, round_trips, run_corpus
from qha.homology import tor
from qha.localisation import (
    ProjMap,
    classify,
    quotient_and_corner,
    sigma_for_module,
    universal_localise,
)
from qha.modcat import projective
from qha.presentations import PathAlgebra, build_algebra
from qha.recollement import (
    algebra_summary,
    build_recollement,
    certify_homological_localisation,
    derived_simplicity_witness,
    scan_arrows,
    scan_stratifying,
    sigma_summary,
)
from qha.utils import (
    DEFAULT_MAX_ITER,
    DEFAULT_RESOLUTION_CAP,
    DEFAULT_TOR_CAP,
    default_max_dim,
    drop_none,
    file_digest,
    one_based,
)

logger = logging.getLogger(__name__)

CAP_ERRORS = (CapExceeded, NotAdmissibleUpToCap, ResolutionCapExceeded)


class Session:
    """Inputs read by a command, with their digests"""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.inputs: Dict[str, str] = {}

    def digest(self, filepath: str) -> str:
        self.inputs[filepath] = file_digest(filepath)
        return filepath

    def algebra(self) -> PathAlgebra:
        presentation = load_algebra(self.digest(self.args.algebra))
        return build_algebra(presentation, self.args.max_dim)

    def dirpath(self) -> str:
        return os.path.dirname(os.path.abspath(self.args.algebra))

    def module(self, algebra: PathAlgebra, spec: str):
        module = module_from_spec(algebra, spec, self.dirpath())
        candidate = os.path.join(self.dirpath(), spec)
        if os.path.exists(candidate):
            self.digest(candidate)
        return module

    def sigmas(self, algebra: PathAlgebra) -> List[ProjMap]:
        if self.args.sigma is not None:
            return load_sigma(self.digest(self.args.sigma), algebra)
        specs = [s for s in self.args.at_modules.split(",") if s.strip()]
        if not specs:
            raise ValidationError("--at-modules needs at least one module")
        return [
            sigma_for_module(algebra, self.module(algebra, s), self.args.resolution_cap)
            for s in specs
        ]


def _vertices(text: str) -> List[int]:
    try:
        vertices = [int(v) - 1 for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"expected comma separated vertices, got {text!r}")
    if not vertices:
        raise ValidationError("--quotient needs at least one vertex")
    return vertices


def cmd_check(session: Session) -> Dict[str, Any]:
    algebra = session.algebra()
    presentation = algebra.presentation
    result = algebra_summary(algebra)
    result.update(
        {
            "field": algebra.presentation.field_label,
            "vertices": algebra.vertex_count,
            "arrows": [
                {"name": a.name, "source": a.source + 1, "target": a.target + 1}
                for a in algebra.quiver.arrows
            ],
            "relations": [presentation.relation_label(r) for r in presentation.relations],
            "basis": algebra.labels,
            "projectives": [
                projective(algebra, v).dimension for v in range(algebra.vertex_count)
            ],
        }
    )
    verdicts = {"admissible": True, "round_trip": round_trips(algebra)}
    return {"result": result, "verdicts": verdicts, "summary": f"dimension {algebra.dimension}"}


def cmd_localize(session: Session) -> Dict[str, Any]:
    args = session.args
    algebra = session.algebra()
    sigmas = session.sigmas(algebra)
    f = universal_localise(algebra, sigmas, args.max_dim, args.max_iter)
    flags = classify(f, args.resolution_cap, args.tor_cap)
    result = {
        "dim_A": algebra.dimension,
        "dim_B": f.target.dimension,
        "sigmas": [sigma_summary(s) for s in sigmas],
        "history": f.reflection.history,
        "iterations": f.reflection.iterations,
        "injective": f.is_injective(),
        "surjective": f.is_surjective(),
    }
    verdicts = flags.as_dict()
    if flags.is_epi:
        certificate = certify_homological_localisation(f, args.resolution_cap, args.tor_cap)
        verdicts["homological_localisation"] = certificate.status
    return {
        "result": result,
        "verdicts": verdicts,
        "summary": f"dim B = {f.target.dimension}, homological {flags.homological}",
    }


def cmd_epi(session: Session) -> Dict[str, Any]:
    args = session.args
    algebra = session.algebra()
    vertices = _vertices(args.quotient)
    epi, corner = quotient_and_corner(algebra, vertices)
    flags = classify(epi, args.resolution_cap, args.tor_cap)
    result = {
        "vertices": one_based(sorted(set(vertices))),
        "quotient": algebra_summary(epi.target),
        "corner": algebra_summary(corner),
    }
    return {
        "result": result,
        "verdicts": flags.as_dict(),
        "summary": f"dim A/AeA = {epi.target.dimension}, dim eAe = {corner.dimension}",
    }


def cmd_tor(session: Session) -> Dict[str, Any]:
    args = session.args
    algebra = session.algebra()
    right = session.module(algebra.opposite(), args.right)
    left = session.module(algebra, args.left)
    dim = tor(right, left, args.degree, args.tor_cap)
    result = {"degree": args.degree, "right": right.name, "left": left.name, "dimension": dim}
    return {"result": result, "verdicts": {}, "summary": f"dim Tor_{args.degree} = {dim}"}


def cmd_recollement(session: Session) -> Dict[str, Any]:
    args = session.args
    algebra = session.algebra()
    sigmas = session.sigmas(algebra)
    f = universal_localise(algebra, sigmas, args.max_dim, args.max_iter)
    try:
        report = build_recollement(f, args.resolution_cap, args.tor_cap)
    except HypothesisFailed as e:
        verdicts = {"recollement": e.reason, "failed": e.which}
        return {
            "result": {"dim_A": algebra.dimension, "dim_B": f.target.dimension},
            "verdicts": verdicts,
            "summary": f"no recollement: {', '.join(e.which)}",
        }
    report.sigma = sigmas[0] if len(sigmas) == 1 else None
    verdicts = {
        "recollement": "built",
        "nontrivial": report.nontrivial,
        "omega_surjective": report.omega_surjective,
        "trace_check": report.trace_check,
        "right_isomorphism": report.right_isomorphism,
    }
    return {
        "result": report.as_dict(),
        "verdicts": drop_none(verdicts),
        "summary": f"recollement with right ring of dimension {report.right.dimension}",
    }


def cmd_scan(session: Session) -> Dict[str, Any]:
    args = session.args
    algebra = session.algebra()
    both = not args.arrows and not args.stratifying
    result: Dict[str, Any] = {}
    arrow_scans = stratifying_scans = None
    if args.arrows or both:
        arrow_scans = scan_arrows(
            algebra, args.resolution_cap, args.tor_cap, args.max_dim, args.max_iter
        )
        result["arrows"] = [s.as_dict() for s in arrow_scans]
    if args.stratifying or both:
        stratifying_scans = scan_stratifying(algebra, args.resolution_cap, args.tor_cap)
        result["stratifying"] = [s.as_dict() for s in stratifying_scans]
    witness = derived_simplicity_witness(
        algebra,
        args.resolution_cap,
        args.tor_cap,
        args.max_dim,
        args.max_iter,
        arrow_scans,
        stratifying_scans,
    )
    verdicts = {"witness": None if witness is None else f"{witness.kind} {witness.label}"}
    if witness is not None:
        result["witness"] = witness.as_dict()
    return {
        "result": result,
        "verdicts": verdicts,
        "summary": "no witness found" if witness is None else f"witness {verdicts['witness']}",
    }


def cmd_corpus(session: Session) -> Dict[str, Any]:
    args = session.args
    if args.action == "list":
        entries = [
            {"name": e["name"], "algebra": e["algebra"], "sigma": e["sigma"]} for e in CORPUS
        ]
        summary = f"{len(entries)} entries"
        return {"result": {"entries": entries}, "verdicts": {}, "summary": summary}
    results = run_corpus(
        args.only,
        resolution_cap=args.resolution_cap,
        tor_cap=args.tor_cap,
        max_dim=args.max_dim,
        max_iter=args.max_iter,
        progress=not args.quiet,
    )
    failed = [r["name"] for r in results if not r["passed"]]
    return {
        "result": {"entries": results},
        "verdicts": {"passed": not failed, "failed": failed},
        "summary": f"{len(results) - len(failed)}/{len(results)} entries passed",
        "exit_code": 1 if failed else 0,
    }


COMMANDS: Dict[str, Callable[[Session], Dict[str, Any]]] = {
    "check": cmd_check,
    "localize": cmd_localize,
    "epi": cmd_epi,
    "tor": cmd_tor,
    "recollement": cmd_recollement,
    "scan": cmd_scan,
    "corpus": cmd_corpus,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="Log debug messages")
    common.add_argument("--quiet", action="store_true", help="No summary line or progress bar")
    common.add_argument("--output", help="Write the report to this file instead of stdout")
    common.add_argument("--max-dim", type=int, default=None, help="Dimension cap (QHA_MAX_DIM)")
    common.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER, help="Reflection rounds")
    common.add_argument("--tor-cap", type=int, default=DEFAULT_TOR_CAP, help="Largest Tor degree")
    common.add_argument(
        "--resolution-cap", type=int, default=DEFAULT_RESOLUTION_CAP, help="Resolution length"
    )

    parser = argparse.ArgumentParser(
        prog="qha", description="Homological algebra of quiver algebras"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="Build an algebra and list its basis")
    p.add_argument("algebra")

    p = sub.add_parser("localize", parents=[common], help="Universal localisation")
    p.add_argument("algebra")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--sigma", help="File of maps between projectives")
    group.add_argument("--at-modules", help="Comma separated P<i>, S<i> or module files")

    p = sub.add_parser("epi", parents=[common], help="Quotient by AeA and the corner eAe")
    p.add_argument("algebra")
    p.add_argument("--quotient", required=True, help="Comma separated vertices of e")

    p = sub.add_parser("tor", parents=[common], help="Dimension of Tor_i")
    p.add_argument("algebra")
    p.add_argument("--right", required=True, help="Right module: P<i>, S<i> or a module file")
    p.add_argument("--left", required=True, help="Left module: P<i>, S<i> or a module file")
    p.add_argument("--degree", type=int, required=True)

    p = sub.add_parser("recollement", parents=[common], help="Recollement of a localisation")
    p.add_argument("algebra")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--sigma")
    group.add_argument("--at-modules")

    p = sub.add_parser("scan", parents=[common], help="Search for recollements")
    p.add_argument("algebra")
    p.add_argument("--arrows", action="store_true")
    p.add_argument("--stratifying", action="store_true")

    p = sub.add_parser("corpus", parents=[common], help="Shipped regression corpus")
    p.add_argument("action", choices=["list", "run"])
    p.add_argument("--only", nargs="+", default=None, help="Names of the entries to run")
    return parser


def _jsonable(x: Any) -> Any:
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return str(x)


def _error(e: Exception) -> Dict[str, Any]:
    if isinstance(e, QhaError):
        return {"reason": e.reason, "message": str(e), "details": e.details}
    return {"reason": type(e).__name__.lower(), "message": str(e), "details": {}}


def run(argv: Optional[List[str]] = None) -> int:
    """Run one command and write its JSON report

    :param argv: Arguments without the program name, defaults to ``sys.argv[1:]``
    :return: 0 when computed, 2 on input errors, 3 when a cap was exceeded
    """
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        format="%(asctime)s - %(levelname)s - %(name)s - %(message)s",
        level=logging.DEBUG if args.verbose else logging.WARNING,
        stream=sys.stderr,
        force=True,
    )
    session = Session(args)
    report: Dict[str, Any] = {"command": ["qha"] + argv}
    start = time.perf_counter()
    try:
        if args.max_dim is None:
            args.max_dim = default_max_dim()
        out = COMMANDS[args.command](session)
        code = out.pop("exit_code", 0)
        summary = out.pop("summary")
        report.update(out)
    except CAP_ERRORS as e:
        code, summary = 3, f"cap exceeded: {e}"
        report["error"] = _error(e)
    except InvariantError as e:
        logger.exception("internal certificate failed")
        code, summary = 1, f"internal error: {e}"
        report["error"] = _error(e)
    except (QhaError, OSError) as e:
        code, summary = 2, f"error: {e}"
        report["error"] = _error(e)
    report["inputs"] = session.inputs
    report["exit_code"] = code
    report["timings"] = {"seconds": round(time.perf_counter() - start, 6)}
    text = json.dumps(report, indent=2, sort_keys=True, default=_jsonable)
    if args.output:
        with open(args.output, "w") as f:
            f.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    if not args.quiet:
        sys.stderr.write(f"{args.command}: {summary}\n")
    return code


def main():
    sys.exit(run())
