"""Neuro-symbolic routing toolkit.

A router dispatches natural-language inputs to symbolic expert modules
(calculator, date, currency, database lookup) with a guaranteed fallback.
The calculator is fed by a deterministic natural-language -> arithmetic
argument extractor; a template-based generator and an evaluation harness
measure extractor accuracy across digits, renderings, formats, operations,
and operation counts.
"""

from .arithmetic import (
    ArithExpr,
    CalcParseError,
    EvaluationError,
    Leaf,
    Node,
    Op,
    OPS,
    evaluate,
    format_exact,
    parse_calculator_call,
    parse_exact,
    structurally_equal,
    to_calculator_call,
)
from .dataset import (
    Dataset,
    DatasetSpec,
    Example,
    GenerationError,
    check_no_overlap,
    experiment_spec,
    generate,
    instantiate,
    sample_operands,
    two_op_split,
)
from .evalharness import (
    EvalReport,
    ExperimentConfig,
    LayoutMismatchError,
    baseline_names,
    baseline_report,
    compare,
    parse_report_csv,
    render,
    run,
    score,
)
from .experts import (
    CalculatorExpert,
    CompletionBackend,
    CurrencyExpert,
    DatabaseExpert,
    DateExpert,
    Decline,
    EchoCompletionBackend,
    Expert,
    ExpertDescriptor,
    ExpertResponse,
    FallbackExpert,
    RateTable,
    RecordStore,
    StubCompletionBackend,
    default_experts,
)
from .extractor import (
    BackendTransportError,
    ExtractorBackend,
    Extraction,
    NoParse,
    ReferenceBackend,
    ReferenceExtractor,
    SubprocessBackend,
    extract,
    get_backend,
    normalize,
)
from .numword import (
    NumberParseError,
    NumberRangeError,
    NumberToken,
    Rendering,
    int_to_words,
    lex_numbers,
    words_to_int,
)
from .router import Router, RoutingDecision, RegistrationError, build_router
from .templates import (
    Template,
    bracket_free_formulas,
    bracketed_formulas,
    catalog,
    formula_requires_brackets,
    parse_formula,
)

__version__ = "0.1.0"
