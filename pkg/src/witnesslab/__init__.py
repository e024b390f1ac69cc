"""Entanglement witnesses, their separability windows and structural approximations."""

from .errors import (
    DimensionError,
    InputError,
    NotAWitnessError,
    NotHermitianError,
    PreconditionError,
    WitnessLabError,
)
from .gme import criterion, criterion_window, gme_verdict, q_dicke, q_ghz, q_ghz_lin
from .operators import HermitianOperator, local_decompose, partial_trace, partial_transpose
from .separability import (
    OptimizerConfig,
    SeparabilityWindow,
    grid_oracle,
    nonlinear_extremum,
    ratio_extremum,
    seesaw_extremum,
    separability_window,
)
from .spa import compress, is_compressed, mirror_pair, prop2_bounds, spa_minus, spa_plus, xpa
from .states import DensityMatrix, ProductVector, PureState, SimplexPoint, simplex_classify
from .witnesses import Witness, builtin, detect, detection_threshold, validate_witness

__version__ = "0.1.0"
