"""Digital twin of an omnidirectional four-tendon catheter bending joint."""

from .actuation import (
    MotorConfig,
    MotorState,
    angle_to_displacement,
    displacement_to_angle,
    encoder_quantize,
    encoder_to_angle,
    homed_state,
    motor_step,
)
from .errors import (
    BadScriptError,
    DegenerateTargetError,
    EStopLatchedError,
    InvalidArcError,
    InvalidConfigError,
    ProtocolError,
    StrokeLimitError,
    TjsimError,
    UnreachableTargetError,
)
from .kinematics import (
    THETA_MAX_DEFAULT,
    ArcParams,
    CatheterSpec,
    Pose,
    RingStackConfig,
    arc_jacobian,
    bend_rotation,
    fk_ring_poses,
    fk_tip,
    ik_tip,
    wrap_angle,
)
from .sim import JointSim, JointSnapshot, SimConfig, TargetAck, Waypoint, validate_waypoints
from .tendon import (
    BendCommand,
    LimitReport,
    TendonDisplacements,
    TendonLayout,
    allocate,
    check_limits,
    deallocate,
)

__version__ = "0.1.0"

__all__ = [
    "ArcParams",
    "BadScriptError",
    "BendCommand",
    "CatheterSpec",
    "DegenerateTargetError",
    "EStopLatchedError",
    "InvalidArcError",
    "InvalidConfigError",
    "JointSim",
    "JointSnapshot",
    "LimitReport",
    "MotorConfig",
    "MotorState",
    "Pose",
    "ProtocolError",
    "RingStackConfig",
    "SimConfig",
    "StrokeLimitError",
    "TargetAck",
    "TendonDisplacements",
    "TendonLayout",
    "THETA_MAX_DEFAULT",
    "TjsimError",
    "UnreachableTargetError",
    "Waypoint",
    "allocate",
    "angle_to_displacement",
    "arc_jacobian",
    "bend_rotation",
    "check_limits",
    "deallocate",
    "displacement_to_angle",
    "encoder_quantize",
    "encoder_to_angle",
    "fk_ring_poses",
    "fk_tip",
    "homed_state",
    "ik_tip",
    "motor_step",
    "validate_waypoints",
    "wrap_angle",
    "__version__",
]
