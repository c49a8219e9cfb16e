import pytest

from horn_forge import corpus
from horn_forge.caps import Caps, parse_caps
from horn_forge.certify import oracle
from horn_forge.errors import InputError


def test_corpus_size_and_state_bounds():
    entries = corpus.entries()
    assert len(entries) >= 12
    for e in entries:
        size = 1
        for v in e.ts.vars:
            size *= v.bounds[1] - v.bounds[0] + 1
        assert size <= 10**5


def test_every_query_has_an_oracle_answer():
    for e in corpus.entries():
        for q in e.queries:
            assert oracle(e.ts, q, **e.oracle_kwargs()).answer in ("yes", "no")


def test_entry_config():
    e = corpus.load("p5_secure")
    assert e.config().low_in == ("l",) and e.config("literal").variant == "literal"


def test_parse_caps():
    assert parse_caps("fm=10, states=5") == Caps(fm=10, states=5)
    for bad in ("fm", "nope=1", "fm=x", "fm=0"):
        with pytest.raises(InputError):
            parse_caps(bad)
