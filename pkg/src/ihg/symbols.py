"""Symbol registry for the coefficient field.

Four kinds of generators:
  * param           a complex parameter t with a formal conjugate partner
  * conj-param      the partner symbol (t paired bijectively with conj t)
  * real            a self-conjugate parameter (curve time, metric entries)
  * char            a multiplicative character generator E; conj(E) = 1/E

The registry is process-global and append-only; the polynomial ring that
backs Coefficient arithmetic is rebuilt lazily whenever new symbols appear,
and existing values lift into the extended ring on demand.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from sympy.polys.domains import QQ_I
from sympy.polys.orderings import grlex
from sympy.polys.rings import ring as _sympy_ring

PARAM = "parameter"
CONJ = "conjugate-parameter"
REAL = "real"
CHAR = "character"


@dataclass(frozen=True)
class ParameterSymbol:
    name: str
    kind: str
    conjugate_of: str | None
    index: int

    def __repr__(self) -> str:
        return f"ParameterSymbol({self.name!r}, {self.kind})"


class RingContext:
    """Immutable snapshot of the registry with its backing polynomial ring."""

    def __init__(self, symbols: tuple[ParameterSymbol, ...]):
        self.symbols = symbols
        self.epoch = len(symbols)
        names = tuple(s.name for s in symbols)
        self.names = names
        if names:
            self.ring = _sympy_ring(",".join(names), QQ_I, grlex)[0]
        else:
            # sympy rejects empty generator lists; keep a 1-gen scratch ring
            # with a reserved name that the registry can never produce.
            self.ring = _sympy_ring("__unit__", QQ_I, grlex)[0]
        self.index_of = {s.name: s.index for s in symbols}
        # conj_perm[i] = index whose exponent receives gen i's exponent under
        # conjugation; characters map to themselves (exponent negation is
        # handled by the fraction layer).
        perm = []
        for s in symbols:
            if s.kind in (PARAM, CONJ):
                perm.append(self.index_of[s.conjugate_of])
            else:
                perm.append(s.index)
        self.conj_perm = tuple(perm)
        self.char_indices = tuple(s.index for s in symbols if s.kind == CHAR)

    def gen(self, name: str):
        return self.ring.gens[self.index_of[name]]

    def is_char(self, idx: int) -> bool:
        return self.symbols[idx].kind == CHAR


class _Registry:
    def __init__(self):
        self._lock = threading.Lock()
        self._symbols: list[ParameterSymbol] = []
        self._by_name: dict[str, ParameterSymbol] = {}
        self._context: RingContext | None = None

    def reset(self) -> None:
        with self._lock:
            self._symbols.clear()
            self._by_name.clear()
            self._context = None

    def _add(self, name: str, kind: str, conjugate_of: str | None) -> ParameterSymbol:
        if not name.isidentifier():
            raise ValueError(f"symbol name must be an identifier: {name!r}")
        if name in self._by_name:
            raise ValueError(f"symbol already registered: {name!r}")
        sym = ParameterSymbol(name, kind, conjugate_of, len(self._symbols))
        self._symbols.append(sym)
        self._by_name[name] = sym
        self._context = None
        return sym

    def register_pair(self, name: str, conj_name: str | None = None):
        """Register a complex parameter together with its conjugate partner."""
        conj_name = conj_name or name + "_c"
        with self._lock:
            a = self._add(name, PARAM, conj_name)
            b = self._add(conj_name, CONJ, name)
        return a, b

    def register_real(self, name: str) -> ParameterSymbol:
        with self._lock:
            return self._add(name, REAL, None)

    def register_char(self, name: str) -> ParameterSymbol:
        with self._lock:
            return self._add(name, CHAR, None)

    def lookup(self, name: str) -> ParameterSymbol:
        sym = self._by_name.get(name)
        if sym is None:
            raise KeyError(f"unknown symbol: {name!r}")
        return sym

    def ensure_pair(self, name: str, conj_name: str | None = None):
        """register_pair, or return the existing pair if already present."""
        with self._lock:
            sym = self._by_name.get(name)
            if sym is not None:
                if sym.kind != PARAM:
                    raise ValueError(f"{name!r} already registered as {sym.kind}")
                return sym, self._by_name[sym.conjugate_of]
        return self.register_pair(name, conj_name)

    def ensure_real(self, name: str) -> ParameterSymbol:
        with self._lock:
            sym = self._by_name.get(name)
            if sym is not None:
                if sym.kind != REAL:
                    raise ValueError(f"{name!r} already registered as {sym.kind}")
                return sym
        return self.register_real(name)

    def ensure_char(self, name: str) -> ParameterSymbol:
        with self._lock:
            sym = self._by_name.get(name)
            if sym is not None:
                if sym.kind != CHAR:
                    raise ValueError(f"{name!r} already registered as {sym.kind}")
                return sym
        return self.register_char(name)

    def context(self) -> RingContext:
        with self._lock:
            if self._context is None:
                self._context = RingContext(tuple(self._symbols))
            return self._context

    def all_symbols(self) -> tuple[ParameterSymbol, ...]:
        with self._lock:
            return tuple(self._symbols)


registry = _Registry()


def conjugate_name(name: str) -> str:
    sym = registry.lookup(name)
    if sym.kind in (PARAM, CONJ):
        return sym.conjugate_of
    return name
