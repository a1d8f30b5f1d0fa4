"""Permutation-polynomial interleavers over Z_N, maximum contention-free
verification, and a rate-1/3 turbo codec with a parallel-windowed decoding
harness."""

__version__ = "0.1.0"

from .ppcore import (  # noqa: E402
    DomainError, Factorization, Interleaver, PolySpec, compose, count_quadratic_pps,
    evaluate, factorize, inverse, is_pp_general, is_quadratic_pp, materialize, qpp,
)
from .interleave import (  # noqa: E402
    CFReport, WindowConfig, generate_s_random, is_contention_free, is_mcf,
    spread_factor, spread_upper_bound,
)

__all__ = [
    "DomainError", "Factorization", "Interleaver", "PolySpec", "compose",
    "count_quadratic_pps", "evaluate", "factorize", "inverse", "is_pp_general",
    "is_quadratic_pp", "materialize", "qpp", "CFReport", "WindowConfig",
    "generate_s_random", "is_contention_free", "is_mcf", "spread_factor",
    "spread_upper_bound",
]
