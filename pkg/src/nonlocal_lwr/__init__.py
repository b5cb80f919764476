"""Godunov-type solver laboratory for nonlocal LWR traffic models."""

__version__ = "0.1.0"

from .kernels import (  # noqa: E402
    CONSTANT, EXPONENTIAL, LINEAR, Kernel, KernelFamily, check_admissibility, evaluate,
    first_moment, interval_mass, load_kernel_csv, table_kernel,
)
from .quadrature import (  # noqa: E402
    QuadratureWeights, WeightFamily, build_weights, exact_weights, geometric_weights,
    normalized_riemann_weights, riemann_weights, verify_weight_conditions,
)
from .velocity import (  # noqa: E402
    CLIPPED_GREENSHIELDS, GREENSHIELDS, KRYSTEK, UNDERWOOD, VelocityModel, get_velocity,
)
from .grid import GridSpec  # noqa: E402
from .initial_data import (  # noqa: E402
    bell_shaped, discretize_initial, riemann_rarefaction, riemann_shock, tv_increase,
)
from .scheme import (  # noqa: E402
    CFLVariant, CFLViolation, SchemeConfig, SolutionField, compute_W, max_cfl_ratio, run, step,
)
from .reference import exact_riemann, local_step, reference_solution  # noqa: E402
