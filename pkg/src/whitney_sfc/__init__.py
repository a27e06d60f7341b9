"""Cube-preserving space-filling curves and Whitney-type critical-set maps."""
from .exact import (
    BudgetExceeded,
    CubeAddress,
    DomainError,
    ShapeError,
    cube_geometry,
    digits_of_point,
    point_cube,
)
from .curve import (
    Curve,
    SnState,
    adjacency_report,
    decode_index,
    encode_index,
    fn_cube,
    fn_order,
    fn_point,
    fn_preimage,
    measure_check,
    sn_cell,
    sn_locate,
    sn_preimage,
)
from .whitney import (
    SegmentL,
    ShrunkenCube,
    WhitneyMap,
    b0_eval,
    build_E,
    bump_g,
    cube_image,
    eval_p,
    locate,
    segment_eval,
    shrunken_corner_1d,
    shrunken_side,
    theorem2_lift,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "CubeAddress",
    "DomainError",
    "ShapeError",
    "cube_geometry",
    "digits_of_point",
    "point_cube",
    "Curve",
    "SnState",
    "adjacency_report",
    "decode_index",
    "encode_index",
    "fn_cube",
    "fn_order",
    "fn_point",
    "fn_preimage",
    "measure_check",
    "sn_cell",
    "sn_locate",
    "sn_preimage",
    "SegmentL",
    "ShrunkenCube",
    "WhitneyMap",
    "b0_eval",
    "build_E",
    "bump_g",
    "cube_image",
    "eval_p",
    "locate",
    "segment_eval",
    "shrunken_corner_1d",
    "shrunken_side",
    "theorem2_lift",
]
