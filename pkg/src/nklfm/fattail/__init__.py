"""Fat-tail analysis: only the relative order of the fitness values matters."""
from nklfm.fattail.algorithm import (
    AlgorithmOutput,
    CoverSequence,
    check_direct,
    h_prime_event,
    missed_count,
    run_cover_algorithm,
)
from nklfm.fattail.enumeration import (
    EnumerationResult,
    enumerate_exact,
    q_exact,
    sequence_probability,
)

__all__ = [
    "AlgorithmOutput",
    "CoverSequence",
    "EnumerationResult",
    "check_direct",
    "enumerate_exact",
    "h_prime_event",
    "missed_count",
    "q_exact",
    "run_cover_algorithm",
    "sequence_probability",
]
