"""Entanglement witnesses, measurement maps and intrinsic information."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .errors import DimensionError, InvariantError, NumericalError, QSecretError
from .infotheory import (
    ClassicalChannel,
    IntrinsicResult,
    JointDistribution,
    apply_channel,
    conditional_mutual_information,
    intrinsic_information,
    is_secret_bit,
    mutual_information,
)
from .measure import (
    MeasurementSetting,
    Povm,
    coarse_grain_povm,
    conditional_states,
    measure_bipartite,
    measure_tripartite,
    random_rank1_povm,
    settings_to_povm,
)
from .qcore import (
    DensityMatrix,
    PureTripartiteState,
    min_eig,
    partial_trace,
    partial_transpose,
    purify,
    tensor,
)
from .witness import (
    Witness,
    decompose_local,
    expectation_from_data,
    min_product_overlap,
    npt_witness,
    upb_witness,
)
