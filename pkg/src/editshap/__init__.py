"""Edit-level attribution of sentence-level quality scores.

Given a source sentence, a corrected hypothesis and the edits between
them, this package distributes the metric score difference across the
individual edits — exactly via Shapley values, approximately via
permutation sampling, or with the one-subset Add/Sub baselines — and
ships the evaluation protocols and corpus aggregations built on top.
"""

from .aggregate import error_type_means, precision_by_type
from .attribution import (
    SamplingConfig,
    attribute,
    attribute_add,
    attribute_sub,
    normalize,
    shapley_exact,
    shapley_sampling,
)
from .core import (
    AttributionResult,
    Edit,
    EditSet,
    EditShapError,
    Sentence,
    parse_sentence,
    validate_edit_set,
)
from .edits import (
    apply_all,
    apply_subset,
    extract_edits,
    group_edits,
    parse_m2,
    read_jsonl,
)
from .evaluation import (
    evaluate_agreement,
    evaluate_consistency,
    evaluate_sampling_error,
)
from .scorer import (
    AdditiveEditScorer,
    AffineLengthScorer,
    ExternalScorerClient,
    LinearCombinationScorer,
    NGramLM,
    NGramScorer,
    Scorer,
    SubsetCache,
    SubsetValueScorer,
    TokenCountScorer,
    delta_m,
)

__version__ = "0.1.0"

__all__ = [
    "AdditiveEditScorer",
    "AffineLengthScorer",
    "AttributionResult",
    "Edit",
    "EditSet",
    "EditShapError",
    "ExternalScorerClient",
    "LinearCombinationScorer",
    "NGramLM",
    "NGramScorer",
    "SamplingConfig",
    "Scorer",
    "Sentence",
    "SubsetCache",
    "SubsetValueScorer",
    "TokenCountScorer",
    "apply_all",
    "apply_subset",
    "attribute",
    "attribute_add",
    "attribute_sub",
    "delta_m",
    "error_type_means",
    "evaluate_agreement",
    "evaluate_consistency",
    "evaluate_sampling_error",
    "extract_edits",
    "group_edits",
    "normalize",
    "parse_m2",
    "parse_sentence",
    "precision_by_type",
    "read_jsonl",
    "shapley_exact",
    "shapley_sampling",
    "validate_edit_set",
]
