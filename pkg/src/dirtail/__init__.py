"""Right-tail asymptotics of random Dirichlet series with bounded coefficients."""
from .distributions import DistributionSpec, CgfEval, load_spec, psi

__version__ = "0.1.0"
