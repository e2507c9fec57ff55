"""Construction expressions for finite groups.

Text form, e.g. ``wreath(cyclic(2), cyclic(4))`` or ``perms(4; (0 1), (0 1 2 3))``;
``str(spec)`` is canonical and round-trips through :func:`parse_spec`.
The same tree is available as JSON via :meth:`GroupSpec.to_json` / :func:`spec_from_json`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Any

from .perm import Permutation


class SpecError(ValueError):
    """Malformed or invalid group construction expression."""


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, math.isqrt(p) + 1))


class GroupSpec:
    kind: str = ""

    def order(self) -> int | None:
        """Closed-form order, or None when only enumeration can tell."""
        raise NotImplementedError

    def to_json(self) -> dict[str, Any]:
        raise NotImplementedError

    def validate(self) -> None:
        pass


def _positive(name: str, n: int) -> None:
    if not isinstance(n, int) or n < 1:
        raise SpecError(f"{name} parameter must be a positive integer, got {n!r}")


@dataclass(frozen=True)
class Cyclic(GroupSpec):
    n: int
    kind = "cyclic"

    def validate(self) -> None:
        _positive("cyclic", self.n)

    def order(self) -> int:
        return self.n

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "n": self.n}

    def __str__(self) -> str:
        return f"cyclic({self.n})"


@dataclass(frozen=True)
class Dihedral(GroupSpec):
    """Symmetries of the n-gon, order 2n."""

    n: int
    kind = "dihedral"

    def validate(self) -> None:
        _positive("dihedral", self.n)

    def order(self) -> int:
        return 2 * self.n

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "n": self.n}

    def __str__(self) -> str:
        return f"dihedral({self.n})"


@dataclass(frozen=True)
class Symmetric(GroupSpec):
    n: int
    kind = "symmetric"

    def validate(self) -> None:
        _positive("symmetric", self.n)

    def order(self) -> int:
        return math.factorial(self.n)

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "n": self.n}

    def __str__(self) -> str:
        return f"symmetric({self.n})"


@dataclass(frozen=True)
class Alternating(GroupSpec):
    n: int
    kind = "alternating"

    def validate(self) -> None:
        _positive("alternating", self.n)

    def order(self) -> int:
        return max(1, math.factorial(self.n) // 2)

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "n": self.n}

    def __str__(self) -> str:
        return f"alternating({self.n})"


@dataclass(frozen=True)
class ElementaryAbelian(GroupSpec):
    p: int
    k: int
    kind = "elementary_abelian"

    def validate(self) -> None:
        if not is_prime(self.p):
            raise SpecError(f"elementary_abelian needs a prime, got {self.p}")
        _positive("elementary_abelian rank", self.k)

    def order(self) -> int:
        return self.p**self.k

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "p": self.p, "k": self.k}

    def __str__(self) -> str:
        return f"elementary_abelian({self.p}, {self.k})"


@dataclass(frozen=True)
class Quaternion8(GroupSpec):
    kind = "quaternion8"

    def order(self) -> int:
        return 8

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind}

    def __str__(self) -> str:
        return "quaternion8"


@dataclass(frozen=True)
class PSL2(GroupSpec):
    p: int
    kind = "psl2"

    def validate(self) -> None:
        if not is_prime(self.p):
            raise SpecError(f"psl2 needs a prime, got {self.p}")

    def order(self) -> int:
        full = self.p * (self.p**2 - 1)
        return full if self.p == 2 else full // 2

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "p": self.p}

    def __str__(self) -> str:
        return f"psl2({self.p})"


@dataclass(frozen=True)
class SL2(GroupSpec):
    p: int
    kind = "sl2"

    def validate(self) -> None:
        if not is_prime(self.p):
            raise SpecError(f"sl2 needs a prime, got {self.p}")

    def order(self) -> int:
        return self.p * (self.p**2 - 1)

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "p": self.p}

    def __str__(self) -> str:
        return f"sl2({self.p})"


@dataclass(frozen=True)
class Direct(GroupSpec):
    left: GroupSpec
    right: GroupSpec
    kind = "direct"

    def validate(self) -> None:
        self.left.validate()
        self.right.validate()

    def order(self) -> int | None:
        a, b = self.left.order(), self.right.order()
        return None if a is None or b is None else a * b

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "left": self.left.to_json(), "right": self.right.to_json()}

    def __str__(self) -> str:
        return f"direct({self.left}, {self.right})"


@dataclass(frozen=True)
class Wreath(GroupSpec):
    """Regular wreath product: base^|top| semidirect top."""

    base: GroupSpec
    top: GroupSpec
    kind = "wreath"

    def validate(self) -> None:
        self.base.validate()
        self.top.validate()

    def order(self) -> int | None:
        a, b = self.base.order(), self.top.order()
        return None if a is None or b is None else a**b * b

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "base": self.base.to_json(), "top": self.top.to_json()}

    def __str__(self) -> str:
        return f"wreath({self.base}, {self.top})"


@dataclass(frozen=True)
class Perms(GroupSpec):
    degree: int
    gens: tuple[Permutation, ...]
    kind = "perms"

    def validate(self) -> None:
        _positive("perms degree", self.degree)
        for g in self.gens:
            if g.degree != self.degree:
                raise SpecError(f"generator {g} has degree {g.degree}, expected {self.degree}")

    def order(self) -> None:
        return None

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "degree": self.degree, "gens": [str(g) for g in self.gens]}

    def __str__(self) -> str:
        if not self.gens:
            return f"perms({self.degree})"
        return f"perms({self.degree}; " + ", ".join(str(g) for g in self.gens) + ")"


_UNARY = {"cyclic": Cyclic, "dihedral": Dihedral, "symmetric": Symmetric,
          "alternating": Alternating, "psl2": PSL2, "sl2": SL2}
_ALIASES = {"c": "cyclic", "d": "dihedral", "s": "symmetric", "a": "alternating",
            "sym": "symmetric", "alt": "alternating", "q8": "quaternion8",
            "elab": "elementary_abelian", "wr": "wreath", "dp": "direct"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str) -> SpecError:
        return SpecError(f"{msg} at position {self.pos} in {self.text!r}")

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def name(self) -> str:
        self.skip()
        m = re.compile(r"[A-Za-z_][A-Za-z0-9_]*").match(self.text, self.pos)
        if not m:
            raise self.error("expected a group name")
        self.pos = m.end()
        return m.group(0).lower()

    def integer(self) -> int:
        self.skip()
        m = re.compile(r"-?\d+").match(self.text, self.pos)
        if not m:
            raise self.error("expected an integer")
        self.pos = m.end()
        return int(m.group(0))

    def spec(self) -> GroupSpec:
        name = self.name()
        name = _ALIASES.get(name, name)
        if name == "quaternion8":
            if self.peek() == "(":
                self.expect("(")
                self.expect(")")
            return Quaternion8()
        self.expect("(")
        if name in _UNARY:
            out: GroupSpec = _UNARY[name](self.integer())
        elif name == "elementary_abelian":
            p = self.integer()
            self.expect(",")
            out = ElementaryAbelian(p, self.integer())
        elif name in ("direct", "wreath"):
            a = self.spec()
            self.expect(",")
            b = self.spec()
            out = Direct(a, b) if name == "direct" else Wreath(a, b)
        elif name == "perms":
            degree = self.integer()
            gens = []
            if self.peek() == ";":
                self.pos += 1
                while True:
                    self.skip()
                    m = re.compile(r"(\([^()]*\))+").match(self.text, self.pos)
                    if not m:
                        raise self.error("expected a permutation in cycle notation")
                    self.pos = m.end()
                    try:
                        gens.append(Permutation.parse(m.group(0), degree))
                    except ValueError as exc:
                        raise self.error(str(exc)) from None
                    if self.peek() != ",":
                        break
                    self.pos += 1
            out = Perms(degree, tuple(gens))
        else:
            raise self.error(f"unknown group constructor {name!r}")
        self.expect(")")
        return out


def parse_spec(text: str) -> GroupSpec:
    """Parse the text grammar, or a JSON object if ``text`` starts with ``{``."""
    if text.lstrip().startswith("{"):
        import json

        return spec_from_json(json.loads(text))
    parser = _Parser(text)
    spec = parser.spec()
    if parser.peek():
        raise parser.error("trailing input")
    spec.validate()
    return spec


def spec_from_json(obj: dict[str, Any]) -> GroupSpec:
    try:
        kind = _ALIASES.get(obj["kind"], obj["kind"])
        if kind in _UNARY:
            spec: GroupSpec = _UNARY[kind](int(obj.get("n", obj.get("p"))))
        elif kind == "elementary_abelian":
            spec = ElementaryAbelian(int(obj["p"]), int(obj["k"]))
        elif kind == "quaternion8":
            spec = Quaternion8()
        elif kind == "direct":
            spec = Direct(spec_from_json(obj["left"]), spec_from_json(obj["right"]))
        elif kind == "wreath":
            spec = Wreath(spec_from_json(obj["base"]), spec_from_json(obj["top"]))
        elif kind == "perms":
            d = int(obj["degree"])
            gens = []
            for g in obj.get("gens", []):
                gens.append(Permutation.parse(g, d) if isinstance(g, str) else Permutation(tuple(g)))
            spec = Perms(d, tuple(gens))
        else:
            raise SpecError(f"unknown group kind {obj['kind']!r}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"bad group JSON {obj!r}: {exc}") from None
    spec.validate()
    return spec
