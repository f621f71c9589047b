"""First-passage-time cumulants and Laguerre-Gamma density approximation for the Feller diffusion."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source checkout
    __version__ = "0.1.0"

from .cumulants import (
    CumulantVector,
    MomentVector,
    cumulants_from_moments,
    moments_from_cumulants_bell,
    moments_from_cumulants_recursive,
    standardized_shape,
)
from .feller import (
    FellerParams,
    classify,
    fpt_cumulants,
    fpt_mean_variance_closed,
    fpt_moments,
    laplace_fpt,
    mean_fpt_series,
)
from .laguerre import LaguerreGammaApprox, PdfTable, build_approximant, build_pdf_table, evaluate, match_parameters
from .series import SeriesControl, TruncationError
from .simulate import SimConfig, compare, empirical_pdf, sample_fpt

EXAMPLES = {
    "example1": dict(mu=0.9, tau=1 / 1.5, sigma=1.0, c=0.0, y0=0.2, S=1.0),
    "example2": dict(mu=3.0, tau=0.2, sigma=1.2, c=-10.0, y0=0.0, S=10.0),
    "example2-sigma2": dict(mu=4.0, tau=0.2, sigma=2.0, c=-10.0, y0=0.0, S=10.0),
    "example3": dict(mu=0.02 * 0.25, tau=0.25, sigma=0.1, c=0.0, y0=0.01, S=0.02),
}
