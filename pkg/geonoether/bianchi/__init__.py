"""Class A Bianchi cosmologies in the mini-superspace description."""
from geonoether.bianchi.bianchi_scenario import (
    STRUCTURE_CONSTANTS,
    BianchiModel,
    bianchi_scenario,
    curvature_scalar,
    effective_potential,
    exponential_potential,
    generate_scenario,
    scalar_potential,
)


__all__ = [
    "STRUCTURE_CONSTANTS",
    "BianchiModel",
    "bianchi_scenario",
    "curvature_scalar",
    "effective_potential",
    "exponential_potential",
    "generate_scenario",
    "scalar_potential",
]
