"""Resource caps.

Defaults can be overridden with the ``HORN_FORGE_CAPS`` environment variable,
a comma-separated list of ``key=value`` pairs, e.g.::

    HORN_FORGE_CAPS="dnf=8192,fm=200000,states=50000"

Keys:

``dnf``      maximum number of cubes produced by DNF conversion (4096)
``fm``       maximum number of rows alive during Fourier-Motzkin elimination (100000)
``box``      maximum integer box size for exhaustive integer search (10**7)
``scan``     box size below which integer search scans exhaustively (4096)
``bb``       maximum branch-and-bound nodes (20000)
``states``   maximum explicit state count (100000)
``product``  maximum points visited by the product-space oracle (10**7)
``facts``    maximum ground facts per predicate in explicit fixpoints (20000)
``unroll``   maximum symbolic facts kept by bounded unrolling (20000)
"""
from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

from .errors import InputError


@dataclass(frozen=True)
class Caps:
    dnf: int = 4096
    fm: int = 100_000
    box: int = 10**7
    scan: int = 4096
    bb: int = 20_000
    states: int = 100_000
    product: int = 10**7
    facts: int = 20_000
    unroll: int = 20_000


def parse_caps(text: str, base: Caps | None = None) -> Caps:
    base = base or Caps()
    known = {f.name for f in fields(Caps)}
    updates = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in known:
            raise InputError(f"bad HORN_FORGE_CAPS entry {item!r}")
        try:
            number = int(value)
        except ValueError:
            raise InputError(f"HORN_FORGE_CAPS value for {key} is not an integer") from None
        if number <= 0:
            raise InputError(f"HORN_FORGE_CAPS value for {key} must be positive")
        updates[key] = number
    return replace(base, **updates)


_current = parse_caps(os.environ.get("HORN_FORGE_CAPS", ""))


def get_caps() -> Caps:
    return _current


def set_caps(caps: Caps) -> Caps:
    """Install ``caps`` globally and return the previous value."""
    global _current
    previous, _current = _current, caps
    return previous
