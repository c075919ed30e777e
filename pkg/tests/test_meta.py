"""Key-value metadata grammar: parse, serialize, indexed lists, atomic write."""

import os

import pytest
from hypothesis import given, strategies as st

from forge import meta
from forge.errors import CorruptStore

# keys and values the grammar can carry losslessly: no line-break
# characters (splitlines boundaries), values survive a strip() round-trip,
# keys contain no '=' and don't start with '#'
_BREAKS = "\n\r\x0b\x0c\x1c\x1d\x1e\x85  "
_keys = st.text(
    alphabet=st.characters(codec="utf-8", exclude_characters="= #" + _BREAKS),
    min_size=1, max_size=24,
).filter(lambda k: k == k.strip() and not k.startswith("#"))
_values = st.text(
    alphabet=st.characters(codec="utf-8", exclude_characters=_BREAKS),
    max_size=40,
).map(str.strip)


def test_dumps_sorts_keys():
    text = meta.dumps({"b": "2", "a": "1", "c": "3"})
    assert text == "a = 1\nb = 2\nc = 3\n"


def test_dumps_skips_none_values():
    assert meta.dumps({"a": None, "b": "x"}) == "b = x\n"


def test_dumps_empty_mapping_is_empty_text():
    assert meta.dumps({}) == ""


def test_loads_ignores_comments_and_blanks():
    text = "# header\n\na = 1\n  # indented comment\nb = two words\n"
    assert meta.loads(text) == {"a": "1", "b": "two words"}


def test_loads_keeps_equals_in_value():
    assert meta.loads("expr = x == y\n") == {"expr": "x == y"}


def test_loads_missing_equals_is_corrupt():
    with pytest.raises(CorruptStore) as err:
        meta.loads("just a line\n", source="f.meta")
    assert "line 1" in str(err.value)


def test_loads_empty_key_is_corrupt():
    with pytest.raises(CorruptStore):
        meta.loads(" = orphan value\n")


def test_dumps_rejects_newlines():
    with pytest.raises(ValueError):
        meta.dumps({"a": "two\nlines"})


@given(st.dictionaries(_keys, _values, max_size=12))
def test_round_trip(mapping):
    assert meta.loads(meta.dumps(mapping)) == mapping


def test_write_then_read(tmp_path):
    path = tmp_path / "x.meta"
    meta.write(path, {"k": "v", "n": 7})
    assert meta.read(path) == {"k": "v", "n": "7"}


def test_write_is_bit_stable(tmp_path):
    path_a = tmp_path / "a.meta"
    path_b = tmp_path / "b.meta"
    mapping = {"z": "1", "a": "2", "m.1": "x", "m.2": "y"}
    meta.write(path_a, mapping)
    meta.write(path_b, dict(reversed(list(mapping.items()))))
    assert path_a.read_bytes() == path_b.read_bytes()


def test_write_leaves_no_temp_files(tmp_path):
    meta.write(tmp_path / "x.meta", {"a": "1"})
    assert os.listdir(tmp_path) == ["x.meta"]


def test_read_missing_file_is_corrupt(tmp_path):
    with pytest.raises(CorruptStore):
        meta.read(tmp_path / "nope.meta")


def test_read_non_utf8_is_corrupt(tmp_path):
    path = tmp_path / "bad.meta"
    path.write_bytes(b"\xff\xfe bogus")
    with pytest.raises(CorruptStore):
        meta.read(path)


def test_interrupted_write_preserves_old_content(tmp_path, monkeypatch):
    path = tmp_path / "x.meta"
    meta.write(path, {"version": "old"})

    def boom(src, dst):
        raise OSError("injected crash")

    monkeypatch.setattr(meta, "_rename", boom)
    with pytest.raises(OSError):
        meta.write(path, {"version": "new"})
    monkeypatch.undo()
    assert meta.read(path) == {"version": "old"}
    assert os.listdir(tmp_path) == ["x.meta"]


def test_indexed_orders_numerically():
    mapping = {
        "e.10.kind": "ten", "e.2.kind": "two", "e.1.kind": "one",
        "e.1.name": "first", "other": "x",
    }
    groups = meta.indexed(mapping, "e")
    assert [g["kind"] for g in groups] == ["one", "two", "ten"]
    assert groups[0]["name"] == "first"


def test_indexed_bare_value_under_empty_key():
    assert meta.indexed({"tag.1": "a", "tag.2": "b"}, "tag") == [{"": "a"}, {"": "b"}]


def test_indexed_ignores_non_numeric_and_foreign_keys():
    mapping = {"e.x.kind": "skip", "elephant.1": "skip", "e.1.kind": "keep"}
    assert meta.indexed(mapping, "e") == [{"kind": "keep"}]


def test_flatten_is_inverse_of_indexed():
    items = [{"kind": "a", "name": "n1"}, {"kind": "b"}, {"": "bare"}]
    flat = meta.flatten("e", items)
    assert flat == {"e.1.kind": "a", "e.1.name": "n1", "e.2.kind": "b", "e.3": "bare"}
    assert meta.indexed(flat, "e") == items


def test_split_and_join_list():
    assert meta.split_list("a.dat, b.dat,c.dat") == ["a.dat", "b.dat", "c.dat"]
    assert meta.split_list("  ") == []
    assert meta.join_list(["x", "y"]) == "x, y"
    assert meta.split_list(meta.join_list(["one", "two"])) == ["one", "two"]
