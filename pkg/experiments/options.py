"""
Command-line options shared by all experiment commands
"""
import os
from fractions import Fraction
from typing import Optional

from dotenv import dotenv_values

import config
from .examples import EXAMPLES
from .runner import ExperimentConfig

TRUE_VALUES = ("1", "true", "yes", "on")


def parse_h_list(text: str):
    """'1/32,1/64' or '0.03125,0.015625' -> [0.03125, 0.015625]"""
    try:
        return [float(Fraction(item.strip())) for item in str(text).split(",") if item.strip()]
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"invalid mesh size list {text!r}") from None


def parse_delta_range(text: str):
    """'a:b:n' -> (a, b, n) with n the number of delta values"""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ValueError(f"invalid delta range {text!r}, expected a:b:n")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValueError(f"invalid delta range {text!r}, expected a:b:n") from None


def add_common_arguments(parser):
    parser.add_argument("--example", choices=sorted(EXAMPLES), help="manufactured problem")
    parser.add_argument("--h", help="comma separated mesh sizes, fractions allowed (1/32,1/64)")
    parser.add_argument("--delta", type=float, help="interface shift in [0, 1]")
    parser.add_argument("--delta-range", help="delta sweep a:b:n")
    parser.add_argument("--basis", choices=[config.BASIS_LAGRANGE, config.BASIS_HIERARCHICAL])
    parser.add_argument("--tol", type=float, help="relative CG tolerance")
    parser.add_argument("--shift-unit", help="shift = delta * unit instead of delta * h (e.g. 1/64)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--vtk", action="store_true", default=None, help="write legacy VTK files")
    parser.add_argument("--matrix", action="store_true", default=None, help="write MatrixMarket stiffness files")
    parser.add_argument("--refined-quadrature", action="store_true", default=None,
                        help="evaluate errors with subdivided quadrature")
    parser.add_argument("--no-csv", dest="csv", action="store_false", default=None, help="skip the CSV table")
    parser.add_argument("--config", help="key=value file with any of the options above")
    return parser


def _read_config_file(path: Optional[str]):
    if not path:
        return {}
    if not os.path.isfile(path):
        raise ValueError(f"config file {path!r} not found")
    values = dotenv_values(path)
    return {key.strip().lower().replace("-", "_"): value for key, value in values.items() if value is not None}


def build_config(args, defaults: Optional[dict] = None) -> ExperimentConfig:
    """
    Merge command defaults, the --config file and flags, in increasing
    priority, into a validated ExperimentConfig.
    """
    values = dict(defaults or {})
    values.update(_read_config_file(getattr(args, "config", None)))
    for key in ("example", "h", "delta", "delta_range", "basis", "tol", "shift_unit", "out",
                "vtk", "matrix", "refined_quadrature", "csv"):
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag

    cfg = ExperimentConfig()
    if "example" in values:
        cfg.example = str(values["example"])
    if "h" in values:
        h = values["h"]
        cfg.h_list = parse_h_list(h) if isinstance(h, str) else [float(v) for v in h]
    if "delta" in values:
        cfg.delta = float(values["delta"])
    if values.get("delta_range"):
        rng = values["delta_range"]
        cfg.sweep = parse_delta_range(rng) if isinstance(rng, str) else tuple(rng)
    if "basis" in values:
        cfg.basis = str(values["basis"]).lower()
    if "tol" in values:
        cfg.tol = float(values["tol"])
    if values.get("shift_unit") is not None:
        cfg.shift_unit = float(Fraction(str(values["shift_unit"])))
    if "out" in values:
        cfg.out_dir = str(values["out"])
    cfg.write_vtk = _flag(values.get("vtk", False))
    cfg.write_matrix = _flag(values.get("matrix", False))
    cfg.write_csv = _flag(values.get("csv", True))
    cfg.refined_quadrature = _flag(values.get("refined_quadrature", False))
    cfg.condition = _flag(values.get("condition", False))
    return cfg.validate()


def _flag(value):
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in TRUE_VALUES
