"""Published Cayley tables shipped with the package.

Each file carries a ``# identity: <name>`` comment naming the identity it
was printed as a model of.  Several files do not satisfy that identity;
see ``README.md``.  Callers must re-check before relying on one.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .table import CayleyTable, parse_table


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    identity: str
    table: CayleyTable


@lru_cache(maxsize=None)
def load_corpus() -> tuple[CorpusEntry, ...]:
    out = []
    root = resources.files("qgkit") / "corpus"
    for item in sorted(root.iterdir(), key=lambda p: p.name):
        if not item.name.endswith(".txt"):
            continue
        text = item.read_text(encoding="utf-8")
        identity = ""
        for line in text.splitlines():
            if line.startswith("# identity:"):
                identity = line.split(":", 1)[1].strip()
                break
        out.append(CorpusEntry(item.name[:-4], identity, parse_table(text)))
    return tuple(out)


def corpus_entry(name: str) -> CorpusEntry:
    for e in load_corpus():
        if e.name == name:
            return e
    raise KeyError(f"no corpus table named {name!r}")
