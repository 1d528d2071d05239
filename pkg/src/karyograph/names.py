"""Identifier-safe karyotype names.

``45,X`` becomes ``k45_X``: a leading ``k``, ``;`` and ``,`` to ``_``, and
both parentheses to ``!``. The reverse direction is many-to-one per
character, so :func:`demangle` searches the preimages the ISCN grammar
allows and keeps those that parse.
"""

from __future__ import annotations

import re
from typing import Iterator

from .atlas import BandAtlas
from .iscn import check_karyotype

_FORWARD = str.maketrans({";": "_", ",": "_", "(": "!", ")": "!"})
_SAFE = re.compile(r"k[0-9A-Za-z+\-._!]*")


class DemangleError(ValueError):
    def __init__(self, name: str, message: str, candidates: list[str] | None = None):
        super().__init__(f"{name}: {message}")
        self.name = name
        self.candidates = candidates or []


def mangle(iscn: str) -> str:
    return "k" + iscn.translate(_FORWARD)


def is_safe_name(text: str) -> bool:
    return _SAFE.fullmatch(text) is not None


def _preimages(body: str) -> Iterator[str]:
    # Groups never nest, so paren depth fixes every choice: '!' opens at depth 0
    # and closes inside, '_' is ',' outside a group and ';' inside.
    # Any unbalanced reading is dropped before parsing.
    out = []
    depth = 0
    for ch in body:
        if ch == "!":
            out.append("(" if depth == 0 else ")")
            depth ^= 1
        elif ch == "_":
            out.append("," if depth == 0 else ";")
        else:
            out.append(ch)
    if depth == 0:
        yield "".join(out)


def demangle(name: str, atlas: BandAtlas | None = None) -> str:
    """The unique ISCN string that mangles to ``name`` and parses.

    Raises :class:`DemangleError` when no preimage parses, or when several
    do; the latter is reported rather than resolved.
    """
    if not is_safe_name(name):
        raise DemangleError(name, "not a safe karyotype name")
    found = []
    for candidate in _preimages(name[1:]):
        k, _ = check_karyotype(candidate, atlas)
        if k is not None:
            found.append(candidate)
    if not found:
        raise DemangleError(name, "no grammatical ISCN preimage")
    if len(found) > 1:
        raise DemangleError(name, f"ambiguous: {', '.join(found)}", found)
    return found[0]
