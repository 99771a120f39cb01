"""Context schema and deterministic feature encoding.

A context is encoded as a dense vector: a constant intercept component,
then one block per schema field in declared order. Categorical fields are
one-hot over their declared levels; numeric fields are min-max scaled to
[0, 1] using the schema bounds. The encoding is a pure function of
(raw values, schema), so it is reproducible from config alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Union

import numpy as np

from .exceptions import ConfigError, EncodingError

CATEGORICAL = "categorical"
NUMERIC = "numeric"


@dataclass(frozen=True)
class CategoricalField:
    name: str
    levels: tuple[str, ...]

    kind: str = field(default=CATEGORICAL, init=False)

    def __post_init__(self) -> None:
        if not self.levels:
            raise ConfigError(f"categorical field '{self.name}' has no levels")
        if len(set(self.levels)) != len(self.levels):
            raise ConfigError(f"categorical field '{self.name}' has duplicate levels")

    @property
    def width(self) -> int:
        return len(self.levels)


@dataclass(frozen=True)
class NumericField:
    name: str
    minimum: float
    maximum: float

    kind: str = field(default=NUMERIC, init=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.minimum) and math.isfinite(self.maximum)):
            raise ConfigError(f"numeric field '{self.name}' has non-finite bounds")
        if self.minimum >= self.maximum:
            raise ConfigError(
                f"numeric field '{self.name}' needs min < max "
                f"(got {self.minimum} >= {self.maximum})"
            )

    @property
    def width(self) -> int:
        return 1


FieldSpec = Union[CategoricalField, NumericField]


@dataclass(frozen=True)
class ContextSchema:
    """Ordered field declarations; owns the encoded layout."""

    fields: tuple[FieldSpec, ...]

    def __post_init__(self) -> None:
        names = [f.name for f in self.fields]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate context field names: {names}")

    @property
    def field_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.fields)

    @property
    def encoded_width(self) -> int:
        return 1 + sum(f.width for f in self.fields)

    @property
    def categorical_fields(self) -> tuple[CategoricalField, ...]:
        return tuple(f for f in self.fields if isinstance(f, CategoricalField))

    @property
    def numeric_fields(self) -> tuple[NumericField, ...]:
        return tuple(f for f in self.fields if isinstance(f, NumericField))

    def field_spec(self, name: str) -> FieldSpec:
        for f in self.fields:
            if f.name == name:
                return f
        raise ConfigError(f"unknown context field '{name}'")

    def encoded_slice(self, name: str) -> slice:
        """Index range of a field's components within the encoded vector."""
        offset = 1  # skip intercept
        for f in self.fields:
            if f.name == name:
                return slice(offset, offset + f.width)
            offset += f.width
        raise ConfigError(f"unknown context field '{name}'")


class ContextVector:
    """A raw field map together with its dense encoding."""

    __slots__ = ("raw", "encoded")

    def __init__(self, raw: Mapping[str, Any], encoded: np.ndarray):
        self.raw = dict(raw)
        self.encoded = encoded

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ContextVector):
            return NotImplemented
        return self.raw == other.raw and np.array_equal(self.encoded, other.encoded)

    def __repr__(self) -> str:
        return f"ContextVector({self.raw!r})"


def encode_context(raw: Mapping[str, Any], schema: ContextSchema) -> ContextVector:
    """Encode a raw field map; raises ``EncodingError`` on any mismatch."""
    for name in raw:
        if name not in schema.field_names:
            raise EncodingError(f"unexpected context field '{name}'")

    parts = [1.0]
    normalized: dict[str, Any] = {}
    for spec in schema.fields:
        if spec.name not in raw:
            raise EncodingError(f"missing context field '{spec.name}'")
        value = raw[spec.name]
        if isinstance(spec, CategoricalField):
            level = str(value)
            if level not in spec.levels:
                raise EncodingError(
                    f"unknown level '{level}' for field '{spec.name}'"
                )
            parts.extend(1.0 if level == lv else 0.0 for lv in spec.levels)
            normalized[spec.name] = level
        else:
            try:
                v = float(value)
            except (TypeError, ValueError):
                raise EncodingError(
                    f"non-numeric value {value!r} for field '{spec.name}'"
                ) from None
            if not math.isfinite(v):
                raise EncodingError(f"non-finite value for field '{spec.name}'")
            if v < spec.minimum or v > spec.maximum:
                raise EncodingError(
                    f"value {v} out of bounds [{spec.minimum}, {spec.maximum}] "
                    f"for field '{spec.name}'"
                )
            parts.append((v - spec.minimum) / (spec.maximum - spec.minimum))
            normalized[spec.name] = v

    encoded = np.array(parts, dtype=np.float64)
    encoded.setflags(write=False)
    return ContextVector(normalized, encoded)


def context_key(raw: Mapping[str, Any], schema: ContextSchema) -> str:
    """Canonical string for a raw context, in schema field order."""
    parts = []
    for spec in schema.fields:
        value = raw[spec.name]
        if isinstance(spec, NumericField):
            parts.append(f"{spec.name}={float(value)!r}")
        else:
            parts.append(f"{spec.name}={value}")
    return "|".join(parts)


def as_encoded(x: "ContextVector | np.ndarray") -> np.ndarray:
    """Accept either a ContextVector or an already-encoded vector."""
    if isinstance(x, ContextVector):
        return x.encoded
    return np.asarray(x, dtype=np.float64)
