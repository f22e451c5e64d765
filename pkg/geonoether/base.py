import importlib
import os
from typing import Any, Iterable

import numpy as np
from pydantic import BaseModel, Field, computed_field


def get_import_path(obj: Any) -> str:
    """Get the import path of an object."""
    return f"{obj.__module__}.{obj.__qualname__}"


def omni_import(path: str):
    """
    Import a module, class, function, or attribute given its absolute path.

    Parameters:
        path (str): The absolute path in the form 'package.module.factory' or even deeper nested objects.

    Returns:
        Any: The imported module or attribute.

    Raises:
        ImportError: If no valid module or attribute is found.
    """
    parts = path.split(".")

    # Try progressively shorter module paths until one can be imported
    for i in range(len(parts), 0, -1):
        module_path = ".".join(parts[:i])
        try:
            module = importlib.import_module(module_path)
        except ModuleNotFoundError:
            continue
        obj = module
        for attr in parts[i:]:
            try:
                obj = getattr(obj, attr)
            except AttributeError as e:
                raise ImportError(
                    f"Module '{module_path}' was found, but it does not contain attribute '{attr}'."
                ) from e
        return obj

    raise ImportError(f"Could not import anything from '{path}'.")


def instantiate(
    config: Any, args: Iterable[Any] | None = None, kwargs: dict | None = None, recursive: bool | None = None
) -> Any:
    """Instantiate an object from a config node.

    Args:
        config: A dict with a "_target_" import path (plus optional "_args_" and keyword entries) is called;
            lists and plain dicts are walked; anything else is returned as is.
        args: Positional arguments overriding "_args_".
        kwargs: Keyword arguments overriding the remaining config entries.
        recursive: Whether nested config nodes are instantiated too. None defers to "_recursive_" (default True).

    Returns:
        The instantiated object.
    """
    if recursive is False:
        return config

    if recursive is None and isinstance(config, dict) and config.get("_recursive_", True) is False:
        return config

    if isinstance(config, (tuple, list)):
        return [instantiate(item, recursive=recursive) for item in config]
    if isinstance(config, dict):
        if "_target_" not in config:
            return {k: instantiate(v, recursive=recursive) for k, v in config.items()}
        if args is None:
            args = config.get("_args_", [])
        if kwargs is None:
            kwargs = {k: v for k, v in config.items() if k not in ("_target_", "_args_", "_recursive_")}
        args = [instantiate(arg, recursive=recursive) for arg in args]
        kwargs = {k: instantiate(v, recursive=recursive) for k, v in kwargs.items()}
        return omni_import(config["_target_"])(*args, **kwargs)
    return config


# ======================================================================================================================
# ERRORS
# ======================================================================================================================


class GeonoetherError(Exception):
    """Root of every error raised by the library."""


class ExpressionSyntaxError(GeonoetherError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownIdentifierError(GeonoetherError):
    def __init__(self, name: str, position: int | None = None):
        where = "" if position is None else f" at position {position}"
        super().__init__(f"Unknown identifier '{name}'{where}")
        self.name = name
        self.position = position


class EvaluationDomainError(GeonoetherError):
    """Division by zero, logarithm or root of a negative number, overflow."""


class MissingTimeError(GeonoetherError):
    """The expression references `t` but no time value was supplied."""


class DimensionMismatchError(GeonoetherError):
    pass


class SingularMetricError(GeonoetherError):
    pass


class NonConstantMetricError(GeonoetherError):
    pass


class IntegrationHaltedError(GeonoetherError):
    def __init__(self, message: str, trajectory: Any = None):
        super().__init__(message)
        self.trajectory = trajectory


class ScenarioError(GeonoetherError):
    pass


# ======================================================================================================================
# SETTINGS AND REPORTS
# ======================================================================================================================


SEED_ENVIRONMENT_VARIABLE = "GEONOETHER_SEED"


def default_seed() -> int:
    return int(os.environ.get(SEED_ENVIRONMENT_VARIABLE, "0"))


class CheckSettings(BaseModel):
    tol: float = Field(description="Largest absolute residual accepted by a check", default=1e-8)
    samples: int = Field(description="Number of Halton sample points per check", default=200)
    seed: int = Field(
        description=f"Seed of the sample sequence ({SEED_ENVIRONMENT_VARIABLE} overrides)", default_factory=default_seed
    )
    margin: float = Field(description="Minimum distance of sample points from the excluded locus", default=0.1)


class ResidualBlock(BaseModel):
    name: str = Field(description="Which defining equation the residual belongs to")
    maximum: float = Field(description="Largest absolute residual over the evaluated samples")
    per_sample: list[float] = Field(description="Largest absolute residual at each evaluated sample", default=[])

    @classmethod
    def from_values(cls, name: str, values: np.ndarray) -> "ResidualBlock":
        values = np.abs(np.asarray(values, dtype=float))
        per_sample = values.reshape(values.shape[0], -1).max(axis=1) if values.size else np.zeros(values.shape[0])
        return cls(name=name, maximum=float(per_sample.max(initial=0.0)), per_sample=per_sample.tolist())


class ConditionReport(BaseModel):
    subject: str = Field(description="Name of the vector or claim that was checked")
    blocks: list[ResidualBlock] = Field(description="One residual block per defining equation")
    tol: float
    evaluated: int = Field(description="Number of samples where every block could be evaluated")
    skipped: int = Field(description="Samples dropped because an expression could not be evaluated there", default=0)

    @computed_field  # type: ignore[misc]
    @property
    def maximum(self) -> float:
        return max((b.maximum for b in self.blocks), default=0.0)

    @computed_field  # type: ignore[misc]
    @property
    def passed(self) -> bool:
        return self.evaluated > 0 and self.maximum <= self.tol

    def block(self, name: str) -> ResidualBlock:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    def residuals(self) -> dict[str, float]:
        return {b.name: b.maximum for b in self.blocks}
