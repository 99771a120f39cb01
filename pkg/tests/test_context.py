import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bandit_lens.context import (
    CategoricalField,
    ContextSchema,
    NumericField,
    context_key,
    encode_context,
)
from bandit_lens.exceptions import ConfigError, EncodingError

COUNTRY = ContextSchema((CategoricalField("country", ("A", "B")),))
SPEND = ContextSchema((NumericField("spend", 0.0, 10.0),))


def test_one_hot_first_level():
    cv = encode_context({"country": "A"}, COUNTRY)
    assert cv.encoded.tolist() == [1.0, 1.0, 0.0]


def test_one_hot_second_level():
    cv = encode_context({"country": "B"}, COUNTRY)
    assert cv.encoded.tolist() == [1.0, 0.0, 1.0]


def test_min_max_scaling():
    # (5 - 0) / (10 - 0) = 0.5 by the min-max formula
    cv = encode_context({"spend": 5}, SPEND)
    assert cv.encoded.tolist() == [1.0, 0.5]


def test_unknown_level_names_field_and_level():
    with pytest.raises(EncodingError, match="'C'.*'country'|country.*C"):
        encode_context({"country": "C"}, COUNTRY)


def test_missing_field_is_error():
    with pytest.raises(EncodingError, match="missing context field 'country'"):
        encode_context({}, COUNTRY)


def test_unexpected_field_is_error():
    with pytest.raises(EncodingError, match="unexpected context field"):
        encode_context({"country": "A", "extra": 1}, COUNTRY)


def test_numeric_out_of_bounds_is_error():
    with pytest.raises(EncodingError, match="out of bounds"):
        encode_context({"spend": 11.0}, SPEND)


def test_encoded_width_includes_intercept():
    schema = ContextSchema(
        (
            CategoricalField("country", ("A", "B", "C")),
            NumericField("spend", 0.0, 1.0),
        )
    )
    assert schema.encoded_width == 1 + 3 + 1
    cv = encode_context({"country": "C", "spend": 0.25}, schema)
    assert len(cv.encoded) == schema.encoded_width
    assert cv.encoded[0] == 1.0


def test_encoded_slice_layout():
    schema = ContextSchema(
        (
            CategoricalField("country", ("A", "B")),
            NumericField("spend", 0.0, 1.0),
        )
    )
    assert schema.encoded_slice("country") == slice(1, 3)
    assert schema.encoded_slice("spend") == slice(3, 4)


def test_empty_schema_is_intercept_only():
    schema = ContextSchema(())
    cv = encode_context({}, schema)
    assert cv.encoded.tolist() == [1.0]


def test_schema_validation():
    with pytest.raises(ConfigError):
        ContextSchema((CategoricalField("x", ()),))
    with pytest.raises(ConfigError):
        NumericField("x", 1.0, 1.0)
    with pytest.raises(ConfigError):
        ContextSchema(
            (CategoricalField("x", ("a",)), NumericField("x", 0.0, 1.0))
        )


def test_context_key_is_schema_ordered():
    schema = ContextSchema(
        (
            CategoricalField("country", ("A", "B")),
            NumericField("spend", 0.0, 10.0),
        )
    )
    raw = {"spend": 2.5, "country": "B"}
    assert context_key(raw, schema) == "country=B|spend=2.5"


def test_encoding_is_deterministic():
    cv1 = encode_context({"country": "A"}, COUNTRY)
    cv2 = encode_context({"country": "A"}, COUNTRY)
    assert cv1 == cv2
    assert np.array_equal(cv1.encoded, cv2.encoded)


@settings(max_examples=60, deadline=None)
@given(
    a=st.sampled_from(["A", "B"]),
    b=st.sampled_from(["A", "B"]),
    x=st.floats(min_value=0.0, max_value=10.0),
    y=st.floats(min_value=0.0, max_value=10.0),
)
def test_encoding_injective_up_to_float_precision(a, b, x, y):
    schema = ContextSchema(
        (
            CategoricalField("country", ("A", "B")),
            NumericField("spend", 0.0, 10.0),
        )
    )
    e1 = encode_context({"country": a, "spend": x}, schema).encoded
    e2 = encode_context({"country": b, "spend": y}, schema).encoded
    if a != b or x / 10.0 != y / 10.0:
        assert not np.array_equal(e1, e2)
    else:
        assert np.array_equal(e1, e2)
