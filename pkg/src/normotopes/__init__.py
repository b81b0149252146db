"""Guaranteed overapproximating reachable tubes as norm-ball sets.

The toolkit represents sets as normotopes (a norm ball with an invertible
shape matrix), bounds nonlinear dynamics with interval-Jacobian linear
differential inclusions, evolves center/shape/offset jointly through a
controlled embedding whose every Euler rollout is a sound tube, and shrinks
the terminal set volume with an iterative LQR sweep over the shape-matrix
input.
"""

from .dynamics import (
    LdiCorners,
    RobotArmParams,
    VectorField,
    ldi_corners,
    ltv,
    robot_arm,
    rotation_ltv,
    vanderpol,
)
from .embedding import (
    EmbeddingState,
    HypercontrolSchedule,
    Trajectory,
    adjoint_policy,
    embedding_rhs,
    simulate,
)
from .errors import (
    AnchorOutsideBox,
    BackwardPassDiverged,
    CornerBudgetExceeded,
    DimensionMismatch,
    DimensionTooLarge,
    NormotopeError,
    SingularShape,
    UnsupportedKind,
)
from .ilqr import (
    GainSchedule,
    IlqrConfig,
    IterateLog,
    ValueExpansion,
    backward_pass,
    forward_pass,
    linearize,
    terminal_conditions,
)
from .ilqr import run as run_ilqr
from .intervals import (
    Interval,
    IntervalMatrix,
    IntervalVector,
    corners,
    interval_matvec,
    interval_mul,
)
from .norms import NormKind, log_norm, op_norm, vector_norm
from .sets import (
    HPolytope,
    Normotope,
    contains,
    interval_hull,
    sample,
    to_hrep,
    volume_cost,
)
from .verify import (
    ContainmentReport,
    LtvExactnessReport,
    PmpReport,
    ltv_exactness,
    mc_containment,
    pmp_check,
)

__version__ = "0.1.0"

__all__ = [
    "AnchorOutsideBox",
    "BackwardPassDiverged",
    "ContainmentReport",
    "CornerBudgetExceeded",
    "DimensionMismatch",
    "DimensionTooLarge",
    "EmbeddingState",
    "GainSchedule",
    "HPolytope",
    "HypercontrolSchedule",
    "IlqrConfig",
    "Interval",
    "IntervalMatrix",
    "IntervalVector",
    "IterateLog",
    "LdiCorners",
    "LtvExactnessReport",
    "NormKind",
    "Normotope",
    "NormotopeError",
    "PmpReport",
    "RobotArmParams",
    "SingularShape",
    "Trajectory",
    "UnsupportedKind",
    "ValueExpansion",
    "VectorField",
    "adjoint_policy",
    "backward_pass",
    "contains",
    "corners",
    "embedding_rhs",
    "forward_pass",
    "interval_hull",
    "interval_matvec",
    "interval_mul",
    "ldi_corners",
    "linearize",
    "log_norm",
    "ltv",
    "ltv_exactness",
    "mc_containment",
    "op_norm",
    "pmp_check",
    "robot_arm",
    "rotation_ltv",
    "run_ilqr",
    "sample",
    "simulate",
    "terminal_conditions",
    "to_hrep",
    "vanderpol",
    "vector_norm",
    "volume_cost",
]
