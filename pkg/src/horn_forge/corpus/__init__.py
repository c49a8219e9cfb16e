"""Bundled benchmark transition systems and the queries each one supports."""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from ..generate import SchemaConfig
from ..program import TransitionSystem, parse_program

#: Schemas whose verdict is compared against each oracle query.
QUERY_SCHEMAS = {
    "safety": ("safety-fwd", "safety-bwd", "safety-comb"),
    "termination": ("termination",),
    "noninterference": ("noninterference",),
    "eu": ("exists-until",),
    "game": ("reach-game",),
}


@dataclass(frozen=True)
class Entry:
    name: str
    ts: TransitionSystem
    queries: tuple[str, ...]
    low_in: tuple[str, ...] | None = None
    low_out: tuple[str, ...] | None = None
    sys_step: int | None = None

    def config(self, variant: str = "corrected") -> SchemaConfig:
        return SchemaConfig(variant, self.low_in, self.low_out, self.sys_step)

    def oracle_kwargs(self) -> dict:
        return {"low_in": self.low_in or (), "low_out": self.low_out or (),
                "sys_step": self.sys_step}


def _root():
    return resources.files(__name__)


def path(name: str):
    """Filesystem path of a bundled ``.ts`` file."""
    return _root() / f"{name}.ts"


def load(name: str) -> Entry:
    meta = json.loads((_root() / "manifest.json").read_text())[name]
    ts = parse_program((_root() / f"{name}.ts").read_text(), name)
    opt = (lambda key: tuple(meta[key]) if key in meta else None)
    return Entry(name, ts, tuple(meta["queries"]), opt("low_in"), opt("low_out"),
                 meta.get("sys_step"))


def names() -> list[str]:
    return list(json.loads((_root() / "manifest.json").read_text()))


def entries() -> list[Entry]:
    return [load(n) for n in names()]
