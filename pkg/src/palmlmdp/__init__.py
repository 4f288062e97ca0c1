"""Local multiple directional pattern (LMDP) palmprint descriptors."""

from .descriptor import Descriptor, LabelMap, block_histograms, build_label_map, chi_square
from .errors import FormatError, InputError, LmdpError, ParameterError
from .filter_bank import FilterBank, GaborParams, build_bank, build_gabor_kernel
from .lmdp import (
    BitPattern,
    DirectionAnalysis,
    analyze_map,
    analyze_point,
    dpi_set,
    dpl,
    dpn,
    encode_bits,
    lmdp_integer,
    lmdp_label,
)
from .pipeline import extract, label_map
from .response_field import GrayImage, ResponseStack, convolve_responses, dominant_direction

__version__ = "0.1.0"

__all__ = [
    "BitPattern", "Descriptor", "DirectionAnalysis", "FilterBank", "FormatError", "GaborParams",
    "GrayImage", "InputError", "LabelMap", "LmdpError", "ParameterError", "ResponseStack",
    "analyze_map", "analyze_point", "block_histograms", "build_bank", "build_gabor_kernel",
    "build_label_map", "chi_square", "convolve_responses", "dominant_direction", "dpi_set",
    "dpl", "dpn", "encode_bits", "extract", "label_map", "lmdp_integer", "lmdp_label",
]
