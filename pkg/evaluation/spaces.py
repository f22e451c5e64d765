from typing import Callable, Literal, NamedTuple

from geonoether.collineation import (
    CollineationBasis,
    bianchi_symmetry_catalog,
    flat_projective_catalog,
    sphere_killing_catalog,
    sphere_structure_constants,
)
from geonoether.geometry import SampleBox


SpaceName = Literal["euclidean2", "euclidean3", "minkowski2", "sphere", "hyperbolic", "bianchi", "bianchi-vacuum"]


class Space(NamedTuple):
    catalog: Callable[[], CollineationBasis]
    box: SampleBox
    tol: float
    structure: dict[tuple[str, str], dict[str, int]] | None = None


def _cube(n: int) -> SampleBox:
    return SampleBox(lower=[-1.0] * n, upper=[1.0] * n)


SPHERE_BOX = SampleBox(lower=[0.3, -3.0], upper=[2.8, 3.0])
HYPERBOLIC_BOX = SampleBox(lower=[0.3, -3.0], upper=[2.0, 3.0])

SPACES: dict[str, Space] = {
    "euclidean2": Space(lambda: flat_projective_catalog(2, [1, 1]), _cube(2), 1e-12),
    "euclidean3": Space(lambda: flat_projective_catalog(3, [1, 1, 1]), _cube(3), 1e-12),
    "minkowski2": Space(lambda: flat_projective_catalog(2, [1, -1]), _cube(2), 1e-12),
    "sphere": Space(lambda: sphere_killing_catalog(1), SPHERE_BOX, 1e-10, sphere_structure_constants(1)),
    "hyperbolic": Space(lambda: sphere_killing_catalog(-1), HYPERBOLIC_BOX, 1e-10, sphere_structure_constants(-1)),
    "bianchi": Space(
        bianchi_symmetry_catalog, SampleBox(lower=[-1.0, -2.0, -2.0, -2.0], upper=[1.0, 2.0, 2.0, 2.0]), 1e-8
    ),
    "bianchi-vacuum": Space(
        lambda: bianchi_symmetry_catalog(vacuum=True), SampleBox(lower=[-1.0, -2.0, -2.0], upper=[1.0, 2.0, 2.0]), 1e-8
    ),
}

FLAT_SIGNATURES = {"euclidean2": (1, 1), "euclidean3": (1, 1, 1), "minkowski2": (1, -1)}


def parse_signature(text: str | None, dim: int) -> list[int]:
    """'+-+' → [1, -1, 1]; None means Euclidean."""
    if text is None:
        return [1] * dim
    signs = {"+": 1, "-": -1}
    if len(text) != dim or any(c not in signs for c in text):
        raise ValueError(f"Signature must be {dim} characters from '+-', got {text!r}")
    return [signs[c] for c in text]
