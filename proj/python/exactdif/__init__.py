"""Exact and asymptotic DIF analysis of A x G x R contingency tables.

Counts are passed as flat lists in natural order: index (a*2 + g)*R + r.
"""

from ._exactdif import (
    BASIS_FORMAT_VERSION,
    BasisTooLarge,
    EnumerationTruncated,
    InvalidArgument,
    MleNonexistent,
    ParseError,
    __version__,
    analyze,
    bh_adjust,
    chisq_tail,
    exact_test,
    fiber_count,
    fit,
    markov_basis,
    mle_exists,
    sample_table,
    hci_item17,
)

__all__ = [
    "BASIS_FORMAT_VERSION",
    "BasisTooLarge",
    "EnumerationTruncated",
    "InvalidArgument",
    "MleNonexistent",
    "ParseError",
    "__version__",
    "analyze",
    "bh_adjust",
    "chisq_tail",
    "exact_test",
    "fiber_count",
    "fit",
    "markov_basis",
    "mle_exists",
    "sample_table",
    "hci_item17",
]
