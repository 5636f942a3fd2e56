from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import recovery
from .codes import NodeContent, UnsupportedVariantError, Variant, admissible_variants, encode_message, node_forms
from .params import EncodingVectors, SystemParams, build_encoding_vectors


@dataclass(frozen=True)
class Codec:
    """One variant of the code at fixed parameters, ready to encode, repair and decode."""

    params: SystemParams
    variant: Variant
    systematic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.variant not in admissible_variants(self.params):
            raise UnsupportedVariantError(f"{self.variant} is not available at n={self.params.n} d={self.params.d} q={self.params.q}")
        if self.systematic and self.variant is not Variant.C1:
            raise UnsupportedVariantError("systematic precoding is only defined for c1")

    @cached_property
    def vectors(self) -> EncodingVectors | None:
        if self.variant is Variant.COMPLETE_GRAPH:
            return None
        return build_encoding_vectors(self.params)

    @cached_property
    def forms(self):
        return node_forms(self.variant, self.vectors, self.params, systematic=self.systematic)

    def encode(self, message) -> list[NodeContent]:
        return encode_message(self.variant, message, self.vectors, self.params, systematic=self.systematic)

    def decode(self, nodes) -> np.ndarray:
        return recovery.decode_all(self.variant, nodes, self.vectors, self.params, systematic=self.systematic)

    def repair(self, failed, helpers, contents, mode="auto"):
        return recovery.repair(self.variant, failed, helpers, contents, self.vectors, self.params, mode=mode)

    def repair_with_schedule(self, schedule, contents):
        idx = [ix[0] for ix in schedule.indices]
        return recovery.repair_by_schedule(self.variant, schedule.failed, schedule.helpers, idx, contents,
                                           self.forms, self.params)

    def transfer_admissible(self, failed, helpers) -> bool:
        return recovery.transfer_admissible(self.variant, failed, helpers, self.params)
