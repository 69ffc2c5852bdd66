import numpy as np
import pytest

from passilq.jsonio import (
    SchemaError,
    decode_matrix,
    dumps,
    encode_matrix,
    save_json,
    write_csv,
)


def test_matrix_round_trip_real_and_complex(rng):
    A = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    A[0, 0] = 2.5  # keep one purely real entry in the mix
    back = decode_matrix(encode_matrix(A))
    assert np.array_equal(back, A)


def test_real_entries_encode_as_plain_numbers():
    enc = encode_matrix(np.array([[1.0, 2.0 + 3.0j]]))
    assert enc == [[1.0, [2.0, 3.0]]]


def test_decode_empty_shapes_need_hints():
    z = decode_matrix([], rows=0, cols=3)
    assert z.shape == (0, 3)
    z2 = decode_matrix([[], []], rows=2, cols=0)
    assert z2.shape == (2, 0)


def test_decode_rejects_bad_entries():
    with pytest.raises(SchemaError):
        decode_matrix([[True]])
    with pytest.raises(SchemaError):
        decode_matrix([[1.0], [2.0, 3.0]])
    with pytest.raises(SchemaError):
        decode_matrix([["x"]])
    with pytest.raises(SchemaError):
        decode_matrix([[1.0]], rows=2)
    with pytest.raises(SchemaError):
        decode_matrix("nope")


def test_dumps_sorted_keys_and_fixed_format():
    text = dumps({"b": 1.5, "a": {"z": True, "y": None}})
    assert text.index('"a"') < text.index('"b"')
    assert text.endswith("\n")
    assert "1.5" in text
    # identical content serializes to identical bytes
    assert text == dumps({"a": {"y": None, "z": True}, "b": 1.5})


def test_dumps_seventeen_digit_floats():
    assert "0.10000000000000001" in dumps({"x": 0.1})


def test_dumps_rejects_nonfinite():
    with pytest.raises(ValueError):
        dumps({"x": float("nan")})
    with pytest.raises(ValueError):
        dumps({"x": float("inf")})


def test_dumps_handles_ndarray_and_complex():
    text = dumps({"m": np.array([[1.0 + 2.0j]])})
    assert "[1, 2]" in text


def test_save_json_and_csv(tmp_path):
    p = tmp_path / "r.json"
    text = save_json(p, {"k": 1.0})
    assert p.read_text() == text

    c = tmp_path / "s.csv"
    write_csv(c, ["t", "v"], [np.array([0.0, 1.0]), np.array([2.0, 3.0])])
    lines = c.read_text().strip().split("\n")
    assert lines[0] == "t,v"
    assert lines[1].startswith("0,2")

    with pytest.raises(ValueError):
        write_csv(c, ["t"], [np.zeros(2), np.zeros(2)])
    with pytest.raises(ValueError):
        write_csv(c, ["t", "v"], [np.zeros(2), np.zeros(3)])
