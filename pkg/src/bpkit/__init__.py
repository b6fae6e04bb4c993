"""Breakpoint-distance genome rearrangement toolkit."""

from bpkit.genomes import (
    Chromosome,
    DuplicatedGenome,
    Genome,
    GenomeError,
    TELOMERE,
    base_matching,
    decompose,
    distance,
    distance_x2,
    double_distance_x2,
    double_similarity_x2,
    perfect_duplicate,
    similarity,
    similarity_x2,
    validate,
)

__all__ = [
    "Chromosome",
    "DuplicatedGenome",
    "Genome",
    "GenomeError",
    "TELOMERE",
    "base_matching",
    "decompose",
    "distance",
    "distance_x2",
    "double_distance_x2",
    "double_similarity_x2",
    "perfect_duplicate",
    "similarity",
    "similarity_x2",
    "validate",
]

__version__ = "0.1.0"
