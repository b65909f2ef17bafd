"""Symbolic backend for the moment recursion: operators are atoms, the
expectation builds an expression tree, and rendering reproduces the nested
E(... L_{E(...)} ...) shape used for worked traces."""

from __future__ import annotations


class SymAtom:
    __slots__ = ("name", "side")

    def __init__(self, name, side=None):
        self.name = name
        self.side = side

    def token(self):
        return self.name

    def __eq__(self, other):
        return isinstance(other, SymAtom) and self.name == other.name

    def __hash__(self):
        return hash(("atom", self.name))


class SymIns:
    """A symbolic L_b or R_b whose subscript is itself an expression."""

    __slots__ = ("kind", "value", "side")

    def __init__(self, kind, value):
        self.kind = kind
        self.value = value
        self.side = "l" if kind == "L" else "r"

    def token(self):
        return f"{self.kind}_{{{self.value.render()}}}"

    def __eq__(self, other):
        return (isinstance(other, SymIns) and self.kind == other.kind
                and self.value == other.value)

    def __hash__(self):
        return hash(("ins", self.kind, self.value))


class SymE:
    """E(factor factor ...) of a product of symbolic operators."""

    __slots__ = ("factors",)

    def __init__(self, factors):
        self.factors = tuple(factors)

    def render(self) -> str:
        parts = []
        prev_atom = False
        for f in self.factors:
            tok = f.token()
            is_atom = isinstance(f, SymAtom)
            if parts and not (prev_atom and is_atom):
                parts.append(" ")
            parts.append(tok)
            prev_atom = is_atom
        return "E(" + "".join(parts) + ")"

    def __eq__(self, other):
        return isinstance(other, SymE) and self.factors == other.factors

    def __hash__(self):
        return hash(self.factors)

    def __repr__(self):
        return self.render()


class SymbolicSpace:
    """Space protocol over symbols; insertions never evaluate."""

    d = None

    def expect_product(self, ops):
        return SymE(ops)

    def lb(self, value):
        return SymIns("L", value)

    def rb(self, value):
        return SymIns("R", value)

    @staticmethod
    def atoms(n, prefix="T"):
        return [SymAtom(f"{prefix}{k}") for k in range(1, n + 1)]
