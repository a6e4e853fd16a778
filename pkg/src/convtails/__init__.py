"""Numerical toolkit for tails of convolutions of heavy-tailed laws."""

from .convolution import conv_power, conv_tail, convolve, decomposition_report
from .families import counterexample, discretize, parse_family
from .hfunc import HFunction, construct_h, parse_h
from .lattice import LatticeMeasure
from .lemmas import LEMMA_IDS, lemma_probe
from .montecarlo import big_jump_probe, mc_conv_tail, mc_decomposition
from .probes import Thresholds, Verdict, VerdictReport
from .testers import (check_h_insensitive, test_long_tailed, test_subexponential,
                      test_tail_equivalence, test_weak_tail_equivalence)
from .theorems import THEOREM_IDS, verify_theorem

__version__ = "0.1.0"

__all__ = [
    "HFunction", "LEMMA_IDS", "LatticeMeasure", "THEOREM_IDS", "Thresholds", "Verdict",
    "VerdictReport", "big_jump_probe", "check_h_insensitive", "construct_h", "conv_power",
    "conv_tail", "convolve", "counterexample", "decomposition_report", "discretize",
    "lemma_probe", "mc_conv_tail", "mc_decomposition", "parse_family", "parse_h",
    "test_long_tailed", "test_subexponential", "test_tail_equivalence",
    "test_weak_tail_equivalence", "verify_theorem",
]
# keep pytest from collecting the re-exported testers
__test__ = False
