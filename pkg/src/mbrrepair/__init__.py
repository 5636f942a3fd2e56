"""Product-matrix MBR regenerating codes with repair-by-transfer variants."""

from .codec import Codec
from .codes import NodeContent, Variant, encode, encode_complete_graph, encode_message, precode_systematic
from .field import GF256, Field, FieldElement, Matrix, field_add, field_inv, field_mul
from .field import mat_inverse, mat_mul, mat_rank, mat_solve
from .params import SystemParams, build_encoding_vectors, build_message_matrix, flatten_message_matrix, make_params
from .recovery import (
    RepairMetrics,
    decode_all,
    repair_by_transfer_c1,
    repair_by_transfer_c2,
    repair_by_transfer_complete_graph,
    repair_compute,
)
from .search import schedule_feasible, shared_symbol_census, verify_theorem_witness

__version__ = "0.1.0"
