import logging
import os
from typing import Any, Dict, List, Optional, TypedDict

import numpy as np
from tqdm import tqdm

from qha.data.loaders import (
    format_algebra,
    load_algebra,
    load_sigma,
    modules_from_specs,
    parse_algebra,
)
from qha.errors import CapExceeded, HypothesisFailed, ValidationError
from qha.exactlin import RATIONALS, FieldSpec
from qha.localisation import (
    RingEpi,
    classify,
    quotient_and_corner,
    sigma_for_module,
    universal_localise,
)
from qha.presentations import FDAlgebra, PathAlgebra, build_algebra, make_presentation
from qha.recollement import (
    arrow_conditions,
    build_recollement,
    certify_homological_localisation,
    derived_simplicity_witness,
)
from qha.utils import DEFAULT_MAX_ITER, DEFAULT_RESOLUTION_CAP, DEFAULT_TOR_CAP

logger = logging.getLogger(__name__)

CORPUS_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), "data", "corpus")


class CorpusEntry(TypedDict):
    name: str
    algebra: Optional[str]  # file under the corpus directory, None for built-in algebras
    sigma: Optional[str]
    modules: List[str]  # localise at the presentations of these modules
    corners: List[int]  # one-based vertices of eAe to report
    max_iter: Optional[int]
    scan: bool  # look for a derived simplicity witness
    expected: Dict[str, Any]


class RegressionResult(TypedDict):
    name: str
    passed: bool
    observed: Dict[str, Any]
    mismatches: List[str]


CORPUS: List[CorpusEntry] = [
    {
        "name": "a3_rad2",
        "algebra": "a3_rad2.alg",
        "sigma": "kill_p2.map",
        "modules": [],
        "corners": [],
        "max_iter": None,
        "scan": False,
        "expected": {
            "dim_A": 5,
            "dim_B": 2,
            "round_trip": True,
            "is_epi": True,
            "one_finite": False,
            "homological": "no",
            "projective_dimension": 2,
            "tor": {"1": 0, "2": 1},
            "homological_localisation": "not_one_finite",
            "recollement": "hypothesis_failed",
        },
    },
    {
        "name": "a3_rad2_at_p2",
        "algebra": "a3_rad2.alg",
        "sigma": None,
        "modules": ["P2"],
        "corners": [],
        "max_iter": None,
        "scan": False,
        "expected": {"dim_B": 2, "one_finite": False, "homological": "no"},
    },
    {
        "name": "triangle",
        "algebra": "triangle.alg",
        "sigma": "gamma_star.map",
        "modules": [],
        "corners": [],
        "max_iter": None,
        "scan": False,
        "expected": {
            "dim_A": 6,
            "dim_B": 10,
            "round_trip": True,
            "is_epi": True,
            "injective": True,
            "finite": False,
            "one_finite": True,
            "homological": "yes",
            "homological_localisation": "certified",
            "recollement": "built",
            "dim_E": 4,
            "end_cokernel_dimension": 4,
        },
    },
    {
        "name": "two_cycle",
        "algebra": "two_cycle.alg",
        "sigma": "alpha_star.map",
        "modules": [],
        "corners": [2],
        "max_iter": None,
        "scan": True,
        "expected": {
            "dim_A": 7,
            "dim_B": 8,
            "round_trip": True,
            "is_epi": True,
            "finite": True,
            "one_finite": True,
            "homological": "yes",
            "homological_localisation": "certified",
            "recollement": "built",
            "trace_dimension": 6,
            "trace_check": True,
            "right_isomorphism": True,
            "dim_E": 1,
            "corner_2": 2,
            "qualifying_arrows": ["alpha"],
            "witness": "arrow alpha",
        },
    },
    {
        "name": "a3_linear",
        "algebra": "a3_linear.alg",
        "sigma": None,
        "modules": [],
        "corners": [],
        "max_iter": None,
        "scan": False,
        "expected": {"dim_A": 6, "round_trip": True},
    },
    {
        "name": "cyclic4",
        "algebra": "cyclic4.alg",
        "sigma": None,
        "modules": [],
        "corners": [],
        "max_iter": None,
        "scan": True,
        "expected": {
            "dim_A": 14,
            "round_trip": True,
            "qualifying_arrows": ["a1", "a3", "a4"],
            "witness": "arrow a1",
        },
    },
    {
        "name": "kronecker",
        "algebra": "kronecker.alg",
        "sigma": "a_star.map",
        "modules": [],
        "corners": [],
        "max_iter": 8,
        "scan": False,
        "expected": {"dim_A": 4, "round_trip": True, "cap_exceeded": "max_iter"},
    },
    {
        "name": "diagonal",
        "algebra": None,
        "sigma": None,
        "modules": [],
        "corners": [],
        "max_iter": None,
        "scan": False,
        "expected": {"dim_A": 1, "dim_B": 2, "is_epi": False},
    },
]


def diagonal_embedding(fs: FieldSpec = RATIONALS) -> RingEpi:
    """``K -> K x K``, a ring map that is not an epimorphism"""
    algebra = build_algebra(make_presentation(1, [], fs=fs, name="K"))
    table = np.empty((2, 2, 2), dtype=object)
    table.fill(fs.zero)
    table[0, 0, 0] = table[1, 1, 1] = fs.one
    unit = fs.matrix([[1, 1]])[0]
    idempotents = [fs.matrix([[1, 0]])[0], fs.matrix([[0, 1]])[0]]
    target = FDAlgebra(fs, ["e", "f"], table, unit, idempotents, "KxK")
    return RingEpi.from_matrix(algebra, target, fs.matrix([[1], [1]]), "K->KxK")


def round_trips(algebra: PathAlgebra) -> bool:
    """The serialised presentation rebuilds the same basis and structure constants"""
    text = format_algebra(algebra.presentation)
    rebuilt = build_algebra(parse_algebra(text))
    return rebuilt.words == algebra.words and np.array_equal(rebuilt.table, algebra.table)


def _observe_epi(f: RingEpi, observed: Dict[str, Any], resolution_cap: int, tor_cap: int):
    observed["dim_B"] = f.target.dimension
    flags = classify(f, resolution_cap, tor_cap)
    observed.update({k: v for k, v in flags.as_dict().items() if k != "is_epi"})
    observed["is_epi"] = flags.is_epi
    if not flags.is_epi:
        return
    observed["injective"] = f.is_injective()
    observed["surjective"] = f.is_surjective()
    certificate = certify_homological_localisation(f, resolution_cap, tor_cap)
    observed["homological_localisation"] = certificate.status
    try:
        report = build_recollement(f, resolution_cap, tor_cap)
    except HypothesisFailed as e:
        observed["recollement"] = e.reason
        observed["failed"] = e.which
        return
    observed["recollement"] = "built"
    observed["dim_E"] = report.right.dimension
    observed["trace_check"] = report.trace_check
    observed["right_isomorphism"] = report.right_isomorphism
    observed.update(report.cross_checks)


def _observe_scan(
    algebra: PathAlgebra,
    observed: Dict[str, Any],
    resolution_cap: int,
    tor_cap: int,
    max_dim: Optional[int],
    max_iter: int,
):
    arrows = algebra.quiver.arrows
    observed["qualifying_arrows"] = [
        a.name for k, a in enumerate(arrows) if all(arrow_conditions(algebra, k).values())
    ]
    witness = derived_simplicity_witness(algebra, resolution_cap, tor_cap, max_dim, max_iter)
    observed["witness"] = None if witness is None else f"{witness.kind} {witness.label}"


def run_entry(
    entry: CorpusEntry,
    corpus_dir: str = CORPUS_DIR,
    resolution_cap: int = DEFAULT_RESOLUTION_CAP,
    tor_cap: int = DEFAULT_TOR_CAP,
    max_dim: Optional[int] = None,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RegressionResult:
    observed: Dict[str, Any] = {}
    if entry["algebra"] is None:
        f = diagonal_embedding()
        observed["dim_A"] = f.source.dimension
        _observe_epi(f, observed, resolution_cap, tor_cap)
    else:
        algebra = build_algebra(load_algebra(os.path.join(corpus_dir, entry["algebra"])))
        observed["dim_A"] = algebra.dimension
        observed["round_trip"] = round_trips(algebra)
        if entry["scan"]:
            _observe_scan(algebra, observed, resolution_cap, tor_cap, max_dim, max_iter)
        for v in entry["corners"]:
            _, corner = quotient_and_corner(algebra, [v - 1])
            observed[f"corner_{v}"] = corner.dimension
        sigmas = []
        if entry["sigma"] is not None:
            sigmas += load_sigma(os.path.join(corpus_dir, entry["sigma"]), algebra)
        for module in modules_from_specs(algebra, entry["modules"]):
            sigmas.append(sigma_for_module(algebra, module, resolution_cap))
        if sigmas:
            try:
                f = universal_localise(algebra, sigmas, max_dim, entry["max_iter"] or max_iter)
            except CapExceeded as e:
                observed["cap_exceeded"] = e.which
                observed["history"] = e.history
            else:
                _observe_epi(f, observed, resolution_cap, tor_cap)
    mismatches = [k for k, v in entry["expected"].items() if observed.get(k) != v]
    for k in mismatches:
        expected = entry["expected"][k]
        logger.debug(f"{entry['name']}: {k} expected {expected!r}, got {observed.get(k)!r}")
    return {
        "name": entry["name"],
        "passed": not mismatches,
        "observed": observed,
        "mismatches": mismatches,
    }


def select_entries(only: Optional[List[str]] = None) -> List[CorpusEntry]:
    if not only:
        return list(CORPUS)
    known = {e["name"]: e for e in CORPUS}
    unknown = [n for n in only if n not in known]
    if unknown:
        raise ValidationError(f"unknown corpus entries {unknown}", {"known": sorted(known)})
    return [known[n] for n in only]


def run_corpus(
    only: Optional[List[str]] = None,
    corpus_dir: str = CORPUS_DIR,
    resolution_cap: int = DEFAULT_RESOLUTION_CAP,
    tor_cap: int = DEFAULT_TOR_CAP,
    max_dim: Optional[int] = None,
    max_iter: int = DEFAULT_MAX_ITER,
    progress: bool = True,
) -> List[RegressionResult]:
    """Run the shipped corpus and compare against the recorded values"""
    entries = select_entries(only)
    results = []
    for entry in tqdm(entries, desc="corpus", disable=not progress):
        result = run_entry(entry, corpus_dir, resolution_cap, tor_cap, max_dim, max_iter)
        logger.info(f"{entry['name']}: {'ok' if result['passed'] else 'FAILED'}")
        results.append(result)
    return results
