"""1D-1V Vlasov-Poisson electrons over a fixed ion background.

The library splits into profiles (F, the perturbed initial data, grids),
fields (moments and the field law), the two solvers, characteristic
tracing, the closed-form exterior theory, and run orchestration.
"""

from .config import RunConfig, load_config, parse_config
from .profiles import BackgroundProfile, Grid, build_standard_case
from .run import compare, load_run, run, verify
from .theory import ExteriorSolution, TheoryParams

__version__ = "0.1.0"

__all__ = [
    "BackgroundProfile", "ExteriorSolution", "Grid", "RunConfig", "TheoryParams",
    "build_standard_case", "compare", "load_config", "load_run", "parse_config", "run", "verify",
]
