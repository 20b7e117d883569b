"""Exact verification of discrete Brunn-Minkowski and Borell-Brascamp-Lieb type inequalities
for the lattice point enumerator."""

from .exactnum import (
    INF,
    OrderingCertificate,
    RadicalPower,
    RadicalSum,
    Relation,
    compare_radicals,
    conj_exponent,
    p_mean,
    rat_ceil,
    rat_floor,
)
from .functions import (
    CubeSpec,
    PointMassFunction,
    cavalieri_sum,
    check_hypothesis,
    evaluate,
    lattice_sum,
    make_admissible_h,
    sup_conv,
)
from .search import InstanceFamily, ScanReport, generate, repro_paper, scan
from .sets import (
    Box,
    Interval1D,
    LatticeBasis,
    SetExpr,
    count_lattice,
    lattice_transform,
    membership,
    minkowski_sum,
    noninteger_endpoints,
    normalize_1d,
    project_last,
    scale,
    section,
)
from .verifiers import (
    Certificate,
    PreconditionError,
    Verdict,
    VerifyRequest,
    riemann_limit_demo,
    verify_bbl,
    verify_bm,
    verify_bm_pmean,
    verify_card_sum,
    verify_hks,
    verify_hks_sqrt,
    verify_lemma_ell,
    verify_trivial_card,
)

__all__ = [name for name in dir() if not name.startswith("_")]
