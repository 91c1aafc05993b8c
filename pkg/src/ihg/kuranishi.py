"""Power-series solutions of the Maurer-Cartan equation.

From a basis of dbar-closed decorated (0,1)-forms the series
psi(t) = sum_k psi_k(t) is grown degree by degree: the degree-k bracket
(1/2) sum_{i+j=k} [psi_i, psi_j] splits, per character sector and frame
leg, into a part orthogonal to im(dbar) - whose monomial coefficients
must vanish and join the obstruction ideal - and a dbar-exact part,
whose minimum-norm primitive becomes psi_k.  The loop stops once the
bracket vanishes modulo the ideal at a degree past which no nonzero
products can form.  Branches of the resulting space are explored by
declaring parameters zero or nonzero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import linalg
from .coefficients import Coefficient
from .cohomology import SectorComplex
from .deformation import vector_bracket
from .exterior import Form, MultiIndex, VectorForm
from .geometry import Geometry, StructureError
from .symbols import conjugate_name, registry


class PrimitiveNotFound(ValueError):
    """A bracket component is neither harmonic nor dbar-exact in its sector."""


class DepthCapReached(RuntimeError):
    """The bracket was still active when the degree cap ran out."""


class NotTerminated(ValueError):
    """The series was consumed as finite without a termination flag."""


class InconsistentBranch(ValueError):
    """A branch declaration forces a declared-nonzero parameter to vanish."""


@dataclass(frozen=True)
class GeneratorSet:
    """dbar-closed decorated (0,1)-forms spanning the deformation directions.

    Frame brackets and the frame action on characters both come from the
    geometry (the action table is read off dlog by coframe duality, so
    the two are consistent by construction).
    """

    geom: Geometry
    forms: tuple[Form, ...]

    def __post_init__(self):
        for g in self.forms:
            if not g.is_pure(0, 1):
                raise StructureError(
                    f"generator {g.render()} is not a (0,1)-form",
                    kind="bad_generator",
                )
            if not self.geom.reduce(self.geom.dbar(g)).is_zero():
                raise StructureError(
                    f"generator {g.render()} is not dbar-closed",
                    kind="bad_generator",
                )

    @staticmethod
    def from_geometry(geom: Geometry) -> "GeneratorSet":
        if geom.generators is None:
            raise ValueError(
                f"geometry {geom.name!r} declares no deformation generators"
            )
        return GeneratorSet(geom, tuple(geom.generators))

    def frame_bracket(self, i: int, j: int):
        return self.geom.bracket(("h", i), ("h", j))

    def frame_action(self, i: int, c: Coefficient) -> Coefficient:
        return self.geom.frame_action(("h", i), c)


def fn_bracket(geom: Geometry, a: VectorForm, b: VectorForm) -> VectorForm:
    """Bracket of frame-vector-valued forms.

    [eta (x) X, xi (x) Y] = eta^xi (x) [X,Y] + eta^(X.xi) (x) Y
                            + xi^(Y.eta) (x) X,
    with the frame vectors acting through the character log-derivative
    table; bilinear and graded-symmetric on (0,1) inputs.
    """
    return vector_bracket(geom, a, b)


class KuranishiSeries:
    """Finite Maurer-Cartan series with its obstruction ideal.

    psi_terms maps the parameter degree k to psi_k; ideal holds the
    coefficient conditions accumulated while solving; terminated means
    every later bracket vanishes identically modulo the ideal.
    """

    def __init__(
        self,
        geom: Geometry,
        generators: GeneratorSet,
        parameters: tuple[str, ...],
        psi_terms: dict[int, VectorForm],
        ideal: tuple[Coefficient, ...],
        terminated: bool,
        checked_through: int,
        forced_zeros: tuple[str, ...] = (),
    ):
        self.geom = geom
        self.generators = generators
        self.parameters = tuple(parameters)
        self.psi_terms = {
            k: v for k, v in sorted(psi_terms.items()) if not v.is_zero()
        }
        self.ideal = tuple(ideal)
        self.terminated = terminated
        self.checked_through = checked_through
        self.forced_zeros = tuple(forced_zeros)

    def psi(self) -> VectorForm:
        total = VectorForm.zero()
        for part in self.psi_terms.values():
            total = total + part
        return total

    def term(self, k: int) -> VectorForm:
        return self.psi_terms.get(k, VectorForm.zero())

    def degree(self) -> int:
        return max(self.psi_terms, default=0)

    def to_json_dict(self) -> dict:
        return {
            "geometry": self.geom.name,
            "parameters": list(self.parameters),
            "psi": [
                {
                    "degree": k,
                    "legs": {
                        str(i): f.render()
                        for i, f in sorted(part.components.items())
                    },
                }
                for k, part in self.psi_terms.items()
            ],
            "ideal": [g.render() for g in self.ideal],
            "terminated": self.terminated,
            "checked_through": self.checked_through,
            "forced_zeros": list(self.forced_zeros),
        }


def _diagonal_weights(metric, n: int):
    """Per-coframe-index weights of a diagonal metric, or None for ones."""
    if metric is None:
        return None
    if metric.n != n:
        raise ValueError("metric size does not match the geometry")
    weights = {}
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            entry = metric.h[i - 1][j - 1]
            if i == j:
                weights[i] = entry
            elif not entry.is_zero():
                raise ValueError(
                    "harmonic splitting needs a diagonal metric"
                )
    return weights


def _monomial_weight(mi: MultiIndex, weights) -> Coefficient:
    w = Coefficient.one()
    for i in mi.holo:
        w = w * weights[i]
    for i in mi.anti:
        w = w * weights[i]
    return w


def _orthogonal_split(matrix, vec, weight_vec):
    """vec = matrix.x + residue with residue orthogonal to the column span
    for the (weighted) monomial Hermitian pairing; returns (x, residue).

    The normal system is always consistent because the pairing is
    positive on every conjugation-respecting specialization.
    """
    if not matrix or not matrix[0]:
        return [], list(vec)
    star = linalg.conj_transpose(matrix)
    if weight_vec is not None:
        star = [
            [entry * weight_vec[i] for i, entry in enumerate(row)]
            for row in star
        ]
    gram = linalg.mat_mul(star, matrix)
    rhs = linalg.mat_vec(star, vec)
    x = linalg.solve(gram, rhs)
    if x is None:
        raise PrimitiveNotFound(
            "degenerate pairing: component neither harmonic nor exact"
        )
    mx = linalg.mat_vec(matrix, x)
    residue = [a - b for a, b in zip(vec, mx)]
    return x, residue


def _reduce_vector(vf: VectorForm, ideal) -> VectorForm:
    if not ideal:
        return vf
    return vf.map_forms(
        lambda f: f.map_coefficients(lambda c: c.reduce_modulo(ideal))
    )


def _generator_order(g: Coefficient):
    return (g.numerator_terms(), g.render())


DEFAULT_DEPTH_CAP = 6

# guards the condition-extraction fixpoint; each pass either empties the
# residue or appends a generator, so in practice two passes suffice
_MAX_SPLIT_PASSES = 12


def kuranishi_build(
    geom: Geometry,
    gens: GeneratorSet | tuple[Form, ...] | None = None,
    metric=None,
    depth_cap: int = DEFAULT_DEPTH_CAP,
) -> KuranishiSeries:
    """Solve Maurer-Cartan order by order from the generator basis.

    psi_1 = sum t_{i lambda} gens[lambda] (x) Z_i with one fresh complex
    parameter per (leg, generator) pair.  At each degree the bracket is
    reduced modulo the ideal collected so far; residues orthogonal to
    im(dbar) contribute conditions (squarefree-normalized, since only
    the vanishing locus matters), the exact remainder contributes the
    minimum-norm primitive.  Stored terms are reduced modulo the final
    ideal before returning.
    """
    if gens is None:
        gens = GeneratorSet.from_geometry(geom)
    elif not isinstance(gens, GeneratorSet):
        gens = GeneratorSet(geom, tuple(gens))
    weights = _diagonal_weights(metric, geom.n)
    names: list[str] = []
    for i in range(1, geom.n + 1):
        for lam in range(1, len(gens.forms) + 1):
            name = f"t{i}{lam}"
            registry.ensure_pair(name)
            names.append(name)
    legs = {}
    for i in range(1, geom.n + 1):
        leg = Form.zero()
        for lam, g in enumerate(gens.forms, start=1):
            leg = leg + g * Coefficient.symbol(f"t{i}{lam}")
        legs[i] = leg
    psi: dict[int, VectorForm] = {1: VectorForm(legs)}
    ideal: list[Coefficient] = []
    k_top = 1
    terminated = False
    checked = 1
    for k in range(2, depth_cap + 1):
        checked = k
        bracket = VectorForm.zero()
        for i in range(1, k):
            a, b = psi.get(i), psi.get(k - i)
            if a is None or b is None:
                continue
            bracket = bracket + vector_bracket(geom, a, b) * Fraction(1, 2)
        bracket = _reduce_vector(bracket, ideal)
        if bracket.is_zero():
            if k >= 2 * k_top:
                terminated = True
                break
            continue
        primitive = _solve_degree(geom, bracket, ideal, weights)
        if not primitive.is_zero():
            psi[k] = primitive
            k_top = k
    if not terminated:
        raise DepthCapReached(
            f"bracket still active at degree {depth_cap} for {geom.name!r}"
        )
    psi = {
        k: _reduce_vector(part, ideal) for k, part in psi.items()
    }
    return KuranishiSeries(
        geom,
        gens,
        tuple(names),
        psi,
        tuple(ideal),
        terminated,
        checked,
    )


def _solve_degree(geom, bracket, ideal, weights) -> VectorForm:
    """Split one degree's bracket; grows ideal in place, returns psi_k."""
    for _ in range(_MAX_SPLIT_PASSES):
        candidates: list[Coefficient] = []
        splits = []
        for leg in sorted(bracket.components):
            sectors = bracket.components[leg].char_sectors()
            for sector in sorted(sectors):
                part = sectors[sector]
                cx = SectorComplex(geom, sector)
                vec = cx.to_vector(part, 0, 2)
                matrix = cx.matrix(geom.dbar, 0, 1, 0, 1)
                wvec = None
                if weights is not None:
                    wvec = [
                        _monomial_weight(mi, weights)
                        for mi in cx.basis(0, 2)
                    ]
                x, residue = _orthogonal_split(matrix, vec, wvec)
                splits.append((leg, cx, x))
                for entry in residue:
                    r = entry.reduce_modulo(ideal)
                    if not r.is_zero():
                        candidates.append(r.squarefree_numerator())
        if not candidates:
            legs: dict[int, Form] = {}
            for leg, cx, x in splits:
                f = cx.vector_to_form(x, 0, 1)
                if not f.is_zero():
                    legs[leg] = legs.get(leg, Form.zero()) + f
            return VectorForm(legs)
        unique: dict[str, Coefficient] = {}
        for g in candidates:
            unique.setdefault(g.render(), g)
        for g in sorted(unique.values(), key=_generator_order):
            if not g.reduce_modulo(ideal).is_zero():
                ideal.append(g)
        bracket = _reduce_vector(bracket, ideal)
        if bracket.is_zero():
            return VectorForm.zero()
    raise PrimitiveNotFound(
        "condition extraction failed to stabilize; generator data is "
        "inconsistent with the sector complexes"
    )


@dataclass(frozen=True)
class BranchSpec:
    """A branch of the deformation space: parameters set to zero,
    parameters declared nonzero, extra relations imposed."""

    zeros: tuple[str, ...] = ()
    nonzeros: tuple[str, ...] = ()
    relations: tuple[Coefficient, ...] = ()

    def __post_init__(self):
        overlap = set(self.zeros) & set(self.nonzeros)
        if overlap:
            raise InconsistentBranch(
                f"declared both zero and nonzero: {sorted(overlap)}"
            )


def _strip_nonzero(g: Coefficient, nonzeros) -> Coefficient:
    for name in sorted(nonzeros):
        for gen_name in (name, conjugate_name(name)):
            sym = Coefficient.symbol(gen_name)
            while not g.is_zero() and g.is_multiple_of(sym):
                g = g / sym
    return g


def _forced_variable(g: Coefficient) -> str | None:
    """The lone parameter name when g is unit * name, else None."""
    symbols = g.free_symbols()
    if len(symbols) != 1:
        return None
    name = symbols.pop()
    sym = Coefficient.symbol(name)
    if g.is_multiple_of(sym) and (g / sym).is_scalar():
        return name
    return None


def branch_reduce(series: KuranishiSeries, branch: BranchSpec) -> KuranishiSeries:
    """Specialize the series to a branch.

    Zeros are substituted, declared-nonzero factors divided out of every
    ideal generator, and the consequences propagated to a fixpoint: a
    generator reduced to a single parameter forces that parameter to
    zero.  What survives is returned as the residual relation list.
    """
    zeros = set(branch.zeros)
    nonzeros = set(branch.nonzeros)
    pending = [g for g in series.ideal] + list(branch.relations)
    relations: list[Coefficient] = []
    while True:
        bindings = {}
        for z in zeros:
            bindings[z] = Coefficient.zero()
            bindings[conjugate_name(z)] = Coefficient.zero()
        changed = False
        survivors: list[Coefficient] = []
        for g in pending:
            if bindings:
                g = g.substitute(bindings)
            if g.is_zero():
                continue
            g = _strip_nonzero(g, nonzeros)
            if g.is_scalar():
                raise InconsistentBranch(
                    "a relation reduces to a nonzero constant"
                )
            forced = _forced_variable(g)
            if forced is not None:
                if forced in nonzeros:
                    raise InconsistentBranch(
                        f"{forced} declared nonzero but forced to vanish"
                    )
                zeros.add(forced)
                changed = True
            else:
                survivors.append(g)
        pending = survivors
        if not changed:
            break
    seen: set[str] = set()
    for g in pending:
        normal = g.numerator_normalized()
        key = normal.render()
        if key not in seen:
            seen.add(key)
            relations.append(normal)
    bindings = {}
    for z in zeros:
        bindings[z] = Coefficient.zero()
        bindings[conjugate_name(z)] = Coefficient.zero()
    psi = {
        k: part.substitute(bindings) if bindings else part
        for k, part in series.psi_terms.items()
    }
    return KuranishiSeries(
        series.geom,
        series.generators,
        tuple(n for n in series.parameters if n not in zeros),
        psi,
        tuple(relations),
        series.terminated,
        series.checked_through,
        forced_zeros=tuple(sorted(zeros)),
    )


def series_to_deformation(
    series: KuranishiSeries, branch: BranchSpec | None = None
) -> VectorForm:
    """The finite sum psi(t), ready for deform(); Maurer-Cartan is then
    re-verified independently by the deformation machinery (modulo the
    residual relations when a branch is given)."""
    if not series.terminated:
        raise NotTerminated(
            "series is not flagged terminated; refusing to truncate"
        )
    if branch is not None:
        series = branch_reduce(series, branch)
    return series.psi()
