"""Surface parameterizations mapping design vectors to wall displacements."""

from ..config import ParameterizationConfig, ParameterizationKind
from ..mesh import Mesh

from .bernstein import (
    bernstein,
    bernstein_all,
    bernstein_derivative_all
)

from .design import (
    DesignVector,
    Parameterization
)

from .ffd import (
    FfdBox,
    FfdParameterization,
    ffd_deform,
    ffd_embed
)

from .hicks_henne import (
    HicksHenneParam,
    bump_peaks,
    hh_basis,
    hh_deform
)


def build_parameterization(mesh: Mesh, config: ParameterizationConfig) -> Parameterization:
    if config.kind is ParameterizationKind.HICKS_HENNE:
        return HicksHenneParam(mesh, config.hicks_henne)
    return FfdParameterization(mesh, config.ffd)


__all__ = [
    # Bernstein
    "bernstein",
    "bernstein_all",
    "bernstein_derivative_all",

    # Design vectors
    "DesignVector",
    "Parameterization",
    "build_parameterization",

    # FFD
    "FfdBox",
    "FfdParameterization",
    "ffd_deform",
    "ffd_embed",

    # Hicks-Henne
    "HicksHenneParam",
    "bump_peaks",
    "hh_basis",
    "hh_deform",
]
