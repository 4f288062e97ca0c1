"""Image -> label map -> descriptor for any supported method."""

from __future__ import annotations

from . import baselines
from .descriptor import DEFAULT_BLOCK_SIZE, METHODS, Descriptor, LabelMap, block_histograms, build_label_map
from .errors import ParameterError
from .filter_bank import FilterBank, build_bank


def label_map(image, method: str = "lmdp", bank: FilterBank | None = None,
              ldp_k: int = baselines.DEFAULT_LDP_K) -> LabelMap:
    if method not in METHODS:
        raise ParameterError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    if method in ("lmdp", "lldp") and bank is None:
        bank = build_bank()
    if method == "lmdp":
        return build_label_map(image, bank)
    if method == "lldp":
        return baselines.lldp_gabor_eldp(image, bank)
    if method == "lbp":
        return baselines.lbp_riu2(image)
    if method == "ldp":
        return baselines.ldp(image, ldp_k)
    if method == "eldp":
        return baselines.eldp(image)
    return baselines.ldn(image)


def extract(image, method: str = "lmdp", bank: FilterBank | None = None,
            block_size: int = DEFAULT_BLOCK_SIZE, identity: str = "",
            ldp_k: int = baselines.DEFAULT_LDP_K) -> Descriptor:
    lm = label_map(image, method, bank, ldp_k)
    return block_histograms(lm, block_size, identity=identity)
