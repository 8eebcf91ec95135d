"""qgkit: finite quasigroups, identities, T-quasigroups and model search."""

from .corpus import CorpusEntry, corpus_entry, load_corpus
from .gf2 import gf2r_construct
from .identities import (
    REGISTRY,
    DivisionOnNonQuasigroup,
    Identity,
    IdentityParseError,
    Verdict,
    builtin,
    evaluate,
    holds,
    parse_identity,
    resolve,
)
from .search import (
    InconsistentProblem,
    SearchOutcome,
    SearchProblem,
    count_latin,
    parse_problem,
    search,
    verify_model,
)
from .spectrum import BASE_ORDERS, SpectrumReport, closure, materialize, spectrum_report
from .table import (
    BirkhoffVerdict,
    CayleyTable,
    NotAQuasigroupError,
    PropertyReport,
    TableFormatError,
    check_birkhoff,
    direct_product,
    left_division,
    parse_table,
    properties,
    read_table,
    right_division,
    serialize_table,
    write_table,
)
from .tq import (
    AbelianGroup,
    ConditionReport,
    Endomorphism,
    TQSpec,
    build_tq,
    check_conditions,
    corollary_check,
    cyclic,
    elementary_abelian,
    equivalence_scan,
    tq_spec,
)

__version__ = "0.1.0"
