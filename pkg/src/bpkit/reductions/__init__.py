"""Executable hardness-reduction constructions with encoders, decoders,
normalizers, and verifiers."""

from bpkit.reductions.graphs import Digraph, SimpleGraph, parse_digraph, parse_graph
from bpkit.reductions.matching_median import (
    MedianReductionInstance,
    matching_to_median,
    median_to_matching,
)
from bpkit.reductions.hamiltonian_halving import (
    HalvingReductionInstance,
    halving_to_hamiltonian,
    hamiltonian_to_halving,
)
from bpkit.reductions.quartet import (
    QuartetInstance,
    decode_solution,
    encode_cut,
    maxcut_to_quartet,
    verify_instance,
)
from bpkit.reductions.normalize import normalize

__all__ = [
    "Digraph",
    "SimpleGraph",
    "parse_digraph",
    "parse_graph",
    "MedianReductionInstance",
    "matching_to_median",
    "median_to_matching",
    "HalvingReductionInstance",
    "halving_to_hamiltonian",
    "hamiltonian_to_halving",
    "QuartetInstance",
    "decode_solution",
    "encode_cut",
    "maxcut_to_quartet",
    "verify_instance",
    "normalize",
]
