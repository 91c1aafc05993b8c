"""Invariant complex geometry: structure equations and the d operator.

A geometry fixes a left-invariant coframe phi^1..phi^n of (1,0)-forms with
structure equations d(phi^k) given as (2,0)+(1,1) forms, plus unit-modulus
characters entering coefficients through their logarithmic derivatives
(d E = E * dlog E, with dlog E a closed invariant 1-form and conj(dlog E)
= -dlog E).  Everything downstream (metric conditions, deformations, the
Kuranishi construction) runs through the d operator built here.
"""

from __future__ import annotations

from dataclasses import dataclass

from .coefficients import Coefficient
from .exterior import SCALAR, Form, MultiIndex
from .symbols import CHAR, CONJ, PARAM, REAL, registry


class StructureError(ValueError):
    """Load-time consistency failure.

    kind is a stable tag: "not_integrable", "d2_nonzero", "bad_character",
    or "bad_generator".
    """

    def __init__(self, message: str, kind: str = "d2_nonzero"):
        super().__init__(message)
        self.kind = kind


FrameLabel = tuple[str, int]  # ('h', i) for Z_i, ('a', i) for conj(Z_i)


@dataclass(frozen=True)
class IntegrabilityReport:
    """(0,2)-components of the structure equations.

    ok means every d(phi^k) is purely (2,0)+(1,1).  When it is not, the
    offending components are listed together with the coefficients whose
    common vanishing would restore integrability.
    """

    ok: bool
    offending: tuple[tuple[int, Form], ...]
    constraint_generators: tuple[Coefficient, ...]


@dataclass(frozen=True)
class NilpotentShape:
    """Whether only the top coframe differential is nonzero, omitting itself.

    matches is true when d(phi^j) = 0 for j < n and d(phi^n) involves no
    phi^n or conj(phi^n) factor; geometries of this shape get the
    all-or-none pluriclosed dichotomy.
    """

    matches: bool
    top_index: int


class Geometry:
    def __init__(
        self,
        name: str,
        n: int,
        structure: dict[int, Form],
        chars: dict[str, Form] | None = None,
        generators: tuple[Form, ...] | None = None,
        constraints: tuple[Coefficient, ...] = (),
        validate: bool = True,
    ):
        self.name = name
        self.n = n
        self.structure = {k: structure.get(k, Form.zero()) for k in range(1, n + 1)}
        self.chars = dict(chars or {})
        self.generators = tuple(generators) if generators is not None else None
        self.constraints = tuple(constraints)
        self._d_anti = {
            k: f.conjugate() for k, f in self.structure.items()
        }
        if validate:
            self._validate()

    # -- d and its bigraded pieces -------------------------------------------

    def d_coefficient(self, c: Coefficient) -> Form:
        """d of a function coefficient; only characters vary on the manifold."""
        out = Form.zero()
        for cname, dlog in self.chars.items():
            e = c.euler(cname)
            if not e.is_zero():
                out = out + dlog * e
        return out

    def d_coframe(self, flavor: str, idx: int) -> Form:
        if flavor == "h":
            return self.structure[idx]
        return self._d_anti[idx]

    def d(self, form: Form) -> Form:
        total = Form.zero()
        for mi, c in form.terms():
            dc = self.d_coefficient(c)
            if not dc.is_zero():
                total = total + dc.wedge(Form.monomial(mi.holo, mi.anti))
            factors = [("h", i) for i in mi.holo] + [("a", j) for j in mi.anti]
            for pos, (flavor, idx) in enumerate(factors):
                df = self.d_coframe(flavor, idx)
                if df.is_zero():
                    continue
                pre = factors[:pos]
                post = factors[pos + 1:]
                piece = Form.scalar(c if pos % 2 == 0 else -c)
                piece = piece.wedge(_monomial_of(pre)).wedge(df).wedge(_monomial_of(post))
                total = total + piece
        return total

    def del_op(self, form: Form) -> Form:
        out = Form.zero()
        for (p, q), comp in form.components().items():
            out = out + self.d(comp).component(p + 1, q)
        return out

    def dbar(self, form: Form) -> Form:
        out = Form.zero()
        for (p, q), comp in form.components().items():
            out = out + self.d(comp).component(p, q + 1)
        return out

    def ddbar(self, form: Form) -> Form:
        return self.del_op(self.dbar(form))

    # -- frame-side structure ---------------------------------------------------

    def evaluate_2form(self, form: Form, x: FrameLabel, y: FrameLabel) -> Coefficient:
        first = form.contract_holo(x[1]) if x[0] == "h" else form.contract_anti(x[1])
        second = (
            first.contract_holo(y[1]) if y[0] == "h" else first.contract_anti(y[1])
        )
        return second.coeff((), ())

    def bracket(self, x: FrameLabel, y: FrameLabel) -> dict[FrameLabel, Coefficient]:
        """Lie bracket of frame vectors: alpha([X,Y]) = -d(alpha)(X,Y)."""
        out: dict[FrameLabel, Coefficient] = {}
        for s in range(1, self.n + 1):
            c = -self.evaluate_2form(self.structure[s], x, y)
            if not c.is_zero():
                out[("h", s)] = c
            cb = -self.evaluate_2form(self._d_anti[s], x, y)
            if not cb.is_zero():
                out[("a", s)] = cb
        return out

    def frame_action(self, x: FrameLabel, c: Coefficient) -> Coefficient:
        """Derivative of a function coefficient along a frame vector."""
        out = Coefficient.zero()
        for cname, dlog in self.chars.items():
            e = c.euler(cname)
            if e.is_zero():
                continue
            slot = (
                dlog.coeff((x[1],), ()) if x[0] == "h" else dlog.coeff((), (x[1],))
            )
            if not slot.is_zero():
                out = out + e * slot
        return out

    def holomorphic_structure_only(self) -> bool:
        """True when every d(phi^k) is pure (2,0) with character-free constants."""
        for f in self.structure.values():
            if not f.is_zero() and not f.is_pure(2, 0):
                return False
            for _mi, c in f.terms():
                if not c.char_free():
                    return False
        return True

    def volume_monomial(self) -> MultiIndex:
        rng = tuple(range(1, self.n + 1))
        return MultiIndex(rng, rng)

    # -- validation -----------------------------------------------------------

    def _validate(self) -> None:
        report = integrability_report(self.structure)
        if not report.ok:
            raise StructureError(
                f"{self.name}: d(phi^{report.offending[0][0]}) has a (0,2) "
                "component; integrable structures allow only (2,0) and (1,1)",
                kind="not_integrable",
            )
        for cname, dlog in self.chars.items():
            if registry.lookup(cname).kind != CHAR:
                raise StructureError(
                    f"{cname} is not a registered character", kind="bad_character"
                )
            if not all(mi.degree == 1 for mi, _ in dlog.terms()):
                raise StructureError(
                    f"dlog {cname} must be a 1-form", kind="bad_character"
                )
            if not (dlog.conjugate() + dlog).is_zero():
                raise StructureError(
                    f"dlog {cname} must be anti-self-conjugate "
                    "(unit-modulus character)",
                    kind="bad_character",
                )
            if not self.d(dlog).is_zero():
                raise StructureError(
                    f"dlog {cname} is not closed", kind="bad_character"
                )
        for k in range(1, self.n + 1):
            for flavor, f in (
                ("h", Form.monomial((k,), ())),
                ("a", Form.monomial((), (k,))),
            ):
                residual = self.d(self.d(f))
                if residual.is_zero():
                    continue
                if self.constraints and all(
                    any(c.is_multiple_of(g) for g in self.constraints)
                    for _, c in residual.terms()
                ):
                    # family: d^2 = 0 only on the declared constraint locus
                    continue
                which = f"phi^{k}" if flavor == "h" else f"conj(phi^{k})"
                raise StructureError(
                    f"{self.name}: d^2({which}) != 0", kind="d2_nonzero"
                )
        if self.generators is not None:
            for g in self.generators:
                if g.is_zero() or g.bidegrees() != {(0, 1)}:
                    raise StructureError(
                        f"{self.name}: generators must be nonzero (0,1)-forms",
                        kind="bad_generator",
                    )
                if not self.dbar(g).is_zero():
                    raise StructureError(
                        f"{self.name}: generator {g.render()} is not "
                        "dbar-closed",
                        kind="bad_generator",
                    )


    def __eq__(self, other) -> bool:
        if not isinstance(other, Geometry):
            return NotImplemented
        return (
            self.name == other.name
            and self.n == other.n
            and self.structure == other.structure
            and self.chars == other.chars
            and self.generators == other.generators
            and list(self.constraints) == list(other.constraints)
        )

    def __hash__(self):
        raise TypeError("Geometry is not hashable")

    def __repr__(self) -> str:
        return f"Geometry({self.name!r}, n={self.n})"

    # -- family helpers ------------------------------------------------------

    def free_parameters(self) -> list[str]:
        """Base names of deformation parameters appearing in the structure."""
        seen: set[str] = set()
        for f in self.structure.values():
            for _, c in f.terms():
                for nm in c.free_symbols():
                    sym = registry.lookup(nm)
                    if sym.kind == PARAM or sym.kind == REAL:
                        seen.add(nm)
                    elif sym.kind == CONJ:
                        seen.add(sym.conjugate_of)
        return sorted(seen)

    def reduce(self, form: Form) -> Form:
        """Drop terms whose coefficient lies in the attached constraint ideal.

        Membership is tested generator by generator (exact divisibility),
        which is what the catalog families need.
        """
        if not self.constraints or form.is_zero():
            return form
        out = Form.zero()
        for mi, c in form.terms():
            if any(c.is_multiple_of(g) for g in self.constraints):
                continue
            out = out + Form.monomial(mi.holo, mi.anti, c)
        return out

    def substitute(self, bindings: dict) -> "Geometry":
        """Specialize family parameters; returns a new validated geometry."""
        structure = {
            k: f.substitute(bindings) for k, f in self.structure.items()
        }
        kept = []
        for c in self.constraints:
            value = c.substitute(bindings)
            # fully evaluated constraints carry no residual equation: zero
            # means the point sits on the locus, a nonzero scalar means it
            # sits off it; neither cuts the specialized family any further
            if isinstance(value, Coefficient) and not value.is_scalar():
                kept.append(value)
        generators = None
        if self.generators is not None:
            generators = tuple(g.substitute(bindings) for g in self.generators)
        return Geometry(
            self.name,
            self.n,
            structure,
            chars=dict(self.chars),
            generators=generators,
            constraints=tuple(kept),
        )

    def to_json_dict(self) -> dict:
        out: dict = {
            "name": self.name,
            "dim": self.n,
            "structure": {
                f"dphi{k}": f.render() for k, f in self.structure.items()
            },
            "characters": {
                cname: dlog.render() for cname, dlog in self.chars.items()
            },
        }
        if self.generators is not None:
            out["generators"] = [g.render() for g in self.generators]
        if self.constraints:
            out["constraints"] = [c.render() for c in self.constraints]
        return out


def integrability_report(structure: dict[int, Form]) -> IntegrabilityReport:
    offending: list[tuple[int, Form]] = []
    gens: list[Coefficient] = []
    for k in sorted(structure):
        part = structure[k].component(0, 2)
        if part.is_zero():
            continue
        offending.append((k, part))
        for _, c in part.terms():
            if not any(c == g for g in gens):
                gens.append(c)
    return IntegrabilityReport(
        ok=not offending,
        offending=tuple(offending),
        constraint_generators=tuple(gens),
    )


def check_nilpotent_shape(geom: Geometry) -> NilpotentShape:
    n = geom.n
    for k in range(1, n):
        if not geom.structure[k].is_zero():
            return NilpotentShape(matches=False, top_index=n)
    top = geom.structure[n]
    for mi, _ in top.terms():
        if n in mi.holo or n in mi.anti:
            return NilpotentShape(matches=False, top_index=n)
    return NilpotentShape(matches=True, top_index=n)


def _monomial_of(factors: list[FrameLabel]) -> Form:
    holo = tuple(i for f, i in factors if f == "h")
    anti = tuple(i for f, i in factors if f == "a")
    # factors are already in canonical order within a canonical monomial
    return Form({MultiIndex(holo, anti): Coefficient.one()})
