from __future__ import annotations

import shutil

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gateway_forge import ConstraintAnnotation, ConstraintPattern, Construct, ConstructKind, Scope, load_library, lookup
from gateway_forge.errors import DuplicateKey, LibraryError
from gateway_forge.library import build_library, builtin_library_path
from strategies import identifiers

GCON = "{name} is qualityOfServiceProperty --<{key}>-- {{ on g:architecture actions {{ }} }}\n"


def test_shipped_library(library):
    assert len(library) == 2
    assert sorted(library.names()) == ["FT_reliability", "gLite3Proxy"]
    assert sorted(p.name for p in builtin_library_path().glob("*.gcon")) == ["ft_reliability.gcon",
                                                                            "glite3_proxy.gcon"]


def test_lookup_shipped_keys(library):
    assert lookup(library, ConstraintAnnotation("reliability", "level", "3")).name == "FT_reliability"
    assert lookup(library, ConstraintAnnotation("gridBackend", "gLite", "3.0")).name == "gLite3Proxy"
    assert lookup(library, ConstraintAnnotation("reliability", "level", "4")) is None


def test_lookup_miss_on_empty_library(tmp_path):
    empty = load_library(tmp_path)
    assert len(empty) == 0
    assert lookup(empty, ConstraintAnnotation("privacy", "anonymize", "full")) is None


def test_duplicate_keys(tmp_path):
    (tmp_path / "a.gcon").write_text(GCON.format(name="one", key="reliability::level::3"))
    (tmp_path / "b.gcon").write_text(GCON.format(name="two", key="reliability::level::3"))
    with pytest.raises(DuplicateKey):
        load_library(tmp_path)


def test_wildcards_may_coexist(tmp_path):
    (tmp_path / "a.gcon").write_text(GCON.format(name="one", key="reliability::level::*"))
    (tmp_path / "b.gcon").write_text(GCON.format(name="two", key="reliability::level::*"))
    lib = load_library(tmp_path)
    assert lookup(lib, ConstraintAnnotation("reliability", "level", "9")).name == "one"


def test_parse_failures_are_collected(tmp_path):
    (tmp_path / "a.gcon").write_text("broken is qualityOfServiceProperty {")
    (tmp_path / "b.gcon").write_text("also broken")
    (tmp_path / "notes.txt").write_text("ignored")
    with pytest.raises(LibraryError) as info:
        load_library(tmp_path)
    assert [name for name, _ in info.value.failures] == ["a.gcon", "b.gcon"]


def test_missing_directory(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_library(tmp_path / "nope")


def test_load_order_independence(tmp_path):
    src = builtin_library_path()
    forward, backward = tmp_path / "f", tmp_path / "b"
    forward.mkdir()
    backward.mkdir()
    files = sorted(src.glob("*.gcon"))
    for f in files:
        shutil.copy(f, forward / f.name)
    for f in reversed(files):
        shutil.copy(f, backward / f.name)
    assert load_library(forward) == load_library(backward)


def _construct(name, category, key_name, value):
    return Construct(name, ConstructKind.QOS, ConstraintPattern(category, key_name, value),
                     (Scope("g", "architecture"),))


@settings(max_examples=200, deadline=None)
@given(identifiers, identifiers, identifiers, st.permutations(range(3)))
def test_exact_match_beats_wildcard(category, name, value, order):
    pool = [_construct("exact", category, name, value),
            _construct("wild", category, name, "*"),
            _construct("other", category, name + "x", value)]
    lib = build_library([pool[i] for i in order])
    assert lookup(lib, ConstraintAnnotation(category, name, value)).name == "exact"
    assert lookup(lib, ConstraintAnnotation(category, name, value + "z")).name == "wild"
    assert lookup(lib, ConstraintAnnotation(category + "q", name, value)) is None
