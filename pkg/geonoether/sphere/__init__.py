"""Motion on the sphere and the hyperbolic plane."""
from geonoether.sphere.sphere_scenario import (
    SPHERE_ROWS,
    SphereRow,
    generate_scenario,
    sphere_row,
    sphere_row_scenario,
    sphere_scenario,
)


__all__ = ["SPHERE_ROWS", "SphereRow", "generate_scenario", "sphere_row", "sphere_row_scenario", "sphere_scenario"]
