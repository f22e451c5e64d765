"""Newtonian motion in flat 2d and 3d Euclidean space, and the Ermakov system."""
from geonoether.newtonian.newtonian_scenario import (
    NEWTONIAN_ROWS,
    NewtonianRow,
    ermakov_scenario,
    generate_ermakov_scenario,
    generate_scenario,
    newtonian_row,
    newtonian_scenario,
)


__all__ = [
    "NEWTONIAN_ROWS",
    "NewtonianRow",
    "ermakov_scenario",
    "generate_ermakov_scenario",
    "generate_scenario",
    "newtonian_row",
    "newtonian_scenario",
]
