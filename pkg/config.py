"""
Configuration module for lmfem
Loads environment variables and provides the numerical defaults used by the
mesh generator, the solvers and the experiment harness
"""
import os
from dotenv import load_dotenv
import pytz

# Load environment variables
load_dotenv()

# Level-set root finding
ROOT_TOL = float(os.getenv('LMFEM_ROOT_TOL', 1e-12))  # scaled by the domain diameter
VERTEX_TOL = float(os.getenv('LMFEM_VERTEX_TOL', 1e-10))  # scaled by the patch diameter
NEWTON_MAX_ITER = int(os.getenv('LMFEM_NEWTON_MAX_ITER', 50))
EDGE_SAMPLES = int(os.getenv('LMFEM_EDGE_SAMPLES', 8))

# Quadratic interface rearrangement
ALPHA_MAX = float(os.getenv('LMFEM_ALPHA_MAX', 170.0))  # degrees
EPS_D = float(os.getenv('LMFEM_EPS_D', 0.01))
CORNER_ETA = float(os.getenv('LMFEM_CORNER_ETA', 0.01))  # edge cuts this close to a corner, relative
CORNER_ANGLE = float(os.getenv('LMFEM_CORNER_ANGLE', 5.0))  # degrees between interface normal and cut edge
CURVE_SAMPLES = int(os.getenv('LMFEM_CURVE_SAMPLES', 20))

# Mesh size: h_P = PATCH_SIZE_FACTOR * h
PATCH_SIZE_FACTOR = float(os.getenv('LMFEM_PATCH_SIZE_FACTOR', 4.0))

# Linear algebra
CG_TOL = float(os.getenv('LMFEM_CG_TOL', 1e-10))
CG_MAX_ITER = int(os.getenv('LMFEM_CG_MAX_ITER', 50000))
COND_TOL = float(os.getenv('LMFEM_COND_TOL', 1e-6))
COND_MAX_ITER = int(os.getenv('LMFEM_COND_MAX_ITER', 20000))
ASSEMBLY_CHUNK = int(os.getenv('LMFEM_ASSEMBLY_CHUNK', 20000))  # elements per einsum batch

# Output
OUTPUT_DIR = os.getenv('LMFEM_OUTPUT_DIR', './results')
LOG_LEVEL = os.getenv('LMFEM_LOG_LEVEL', 'INFO').upper()
TIMEZONE = pytz.timezone(os.getenv('LMFEM_TIMEZONE', 'Europe/Paris'))

# Database Configuration
DATABASE_URL = os.getenv('LMFEM_DATABASE_URL', 'sqlite:///lmfem_results.db')
RESULTS_DB = os.getenv('LMFEM_RESULTS_DB', 'true').lower() == 'true'

# Example problems
DOMAIN_ORIGIN = (-2.0, -2.0)
DOMAIN_WIDTH = 4.0
NU_1 = 4.0
NU_2 = 1.0

# Basis kinds
BASIS_LAGRANGE = "lagrange"
BASIS_HIERARCHICAL = "hierarchical"

# Run status
STATUS_COMPLETED = "completed"
STATUS_FAILED = "failed"
STATUS_ASSUMPTION_VIOLATION = "assumption_violation"

# Validation
def validate_config():
    """Validate that all numerical settings are usable"""
    errors = []

    for name in ('ROOT_TOL', 'VERTEX_TOL', 'CG_TOL', 'COND_TOL', 'PATCH_SIZE_FACTOR'):
        if not globals()[name] > 0:
            errors.append(f"{name} must be positive")
    for name in ('NEWTON_MAX_ITER', 'EDGE_SAMPLES', 'CURVE_SAMPLES', 'CG_MAX_ITER',
                 'COND_MAX_ITER', 'ASSEMBLY_CHUNK'):
        if globals()[name] < 1:
            errors.append(f"{name} must be at least 1")
    if not 90.0 < ALPHA_MAX < 180.0:
        errors.append("ALPHA_MAX must lie in (90, 180) degrees")
    if not 0.0 < EPS_D < 0.5:
        errors.append("EPS_D must lie in (0, 0.5)")
    if not 0.0 <= CORNER_ETA < 0.5:
        errors.append("CORNER_ETA must lie in [0, 0.5)")
    if not 0.0 <= CORNER_ANGLE < 90.0:
        errors.append("CORNER_ANGLE must lie in [0, 90) degrees")

    if errors:
        raise ValueError(f"Configuration errors:\n" + "\n".join(f"- {e}" for e in errors))

if __name__ == "__main__":
    try:
        validate_config()
        print("Configuration is valid!")
    except ValueError as e:
        print(e)
