"""Independent numeric cross-check for the symbolic engine.

Each catalog geometry gets an explicit coordinate realization: every
coframe element becomes a 1-form on C^n with callable coefficient
functions, and d is taken by central finite differences of those
functions.  Nothing here consults the engine's structure equations, so
agreement between the two routes is meaningful evidence.
"""

from __future__ import annotations

import cmath
from fractions import Fraction

from ihg.exterior import Form, sort_signed

H_STEP = 1e-5
TOL = 5e-6


class CoordForm:
    """Coordinate differential form: (dz-indices, dzbar-indices) -> f(z)."""

    def __init__(self, terms=None):
        self.terms = dict(terms or {})

    @staticmethod
    def dz(j, fn=None):
        return CoordForm({((j,), ()): fn or (lambda z: 1.0 + 0j)})

    @staticmethod
    def dzbar(j, fn=None):
        return CoordForm({((), (j,)): fn or (lambda z: 1.0 + 0j)})

    @staticmethod
    def scalar(fn):
        return CoordForm({((), ()): fn})

    def __add__(self, other):
        out = dict(self.terms)
        for key, fn in other.terms.items():
            if key in out:
                prev = out[key]
                out[key] = (lambda p, q: (lambda z: p(z) + q(z)))(prev, fn)
            else:
                out[key] = fn
        return CoordForm(out)

    def scale(self, factor):
        return CoordForm({
            key: (lambda f: (lambda z: factor * f(z)))(fn)
            for key, fn in self.terms.items()
        })

    def wedge(self, other):
        out = CoordForm()
        for (h1, a1), f1 in self.terms.items():
            for (h2, a2), f2 in other.terms.items():
                holo, s1 = sort_signed(h1 + h2)
                if s1 == 0:
                    continue
                anti, s2 = sort_signed(a1 + a2)
                if s2 == 0:
                    continue
                cross = -1 if (len(h2) * len(a1)) % 2 else 1
                sign = s1 * s2 * cross
                fn = (lambda p, q, s: (lambda z: s * p(z) * q(z)))(f1, f2, sign)
                out = out + CoordForm({(holo, anti): fn})
        return out

    def conjugate(self):
        out = {}
        for (h, a), fn in self.terms.items():
            sign = -1 if (len(h) * len(a)) % 2 else 1
            out[(a, h)] = (lambda f, s: (lambda z: s * f(z).conjugate()))(
                fn, sign
            )
        return CoordForm(out)

    def d(self, n):
        """Exterior differential by central finite differences."""
        out = CoordForm()
        for (h, a), fn in self.terms.items():
            for j in range(1, n + 1):
                dzj, dzbarj = _wirtinger(fn, j)
                for flavor, part in (("h", dzj), ("a", dzbarj)):
                    if flavor == "h":
                        holo, s1 = sort_signed((j,) + h)
                        anti, s2 = a, 1
                    else:
                        holo, s1 = h, 1
                        anti, s2 = sort_signed((j,) + a)
                        if len(h) % 2:
                            s2 = -s2
                    if s1 == 0 or s2 == 0:
                        continue
                    fn2 = (lambda p, s: (lambda z: s * p(z)))(part, s1 * s2)
                    out = out + CoordForm({(holo, anti): fn2})
        return out

    def at(self, z):
        return {
            key: fn(z)
            for key, fn in self.terms.items()
            if abs(fn(z)) > 1e-14
        }


def _wirtinger(fn, j):
    def dz(z):
        zp, zm = list(z), list(z)
        zp[j - 1] += H_STEP
        zm[j - 1] -= H_STEP
        dx = (fn(tuple(zp)) - fn(tuple(zm))) / (2 * H_STEP)
        zp, zm = list(z), list(z)
        zp[j - 1] += 1j * H_STEP
        zm[j - 1] -= 1j * H_STEP
        dy = (fn(tuple(zp)) - fn(tuple(zm))) / (2 * H_STEP)
        return 0.5 * (dx - 1j * dy)

    def dzbar(z):
        zp, zm = list(z), list(z)
        zp[j - 1] += H_STEP
        zm[j - 1] -= H_STEP
        dx = (fn(tuple(zp)) - fn(tuple(zm))) / (2 * H_STEP)
        zp, zm = list(z), list(z)
        zp[j - 1] += 1j * H_STEP
        zm[j - 1] -= 1j * H_STEP
        dy = (fn(tuple(zp)) - fn(tuple(zm))) / (2 * H_STEP)
        return 0.5 * (dx + 1j * dy)

    return dz, dzbar


def _const(value):
    return lambda z: value


def chart(name, params=None):
    """Coordinate realization: coframe dict, char functions, dimension.

    params supplies complex values for family coefficients (nilfamily_ft,
    fps_family).
    """
    params = params or {}
    if name == "iwasawa":
        coframe = {
            1: CoordForm.dz(1),
            2: CoordForm.dz(2),
            3: CoordForm.dz(3) + CoordForm.dz(2, lambda z: -z[0]),
        }
        return coframe, {}, 3
    if name == "nakamura_3b":
        coframe = {
            1: CoordForm.dz(1),
            2: CoordForm.dz(2, lambda z: cmath.exp(z[0])),
            3: CoordForm.dz(3, lambda z: cmath.exp(-z[0])),
        }
        chars = {"E1": lambda z: cmath.exp(z[0] - z[0].conjugate())}
        return coframe, chars, 3
    if name == "solv4d":
        coframe = {
            1: CoordForm.dz(1),
            2: CoordForm.dz(2, lambda z: cmath.exp(z[0])),
            3: CoordForm.dz(3, lambda z: cmath.exp(-z[0])),
            4: CoordForm.dz(4)
            + CoordForm.dz(3, lambda z: -0.5 * z[1])
            + CoordForm.dz(2, lambda z: 0.5 * z[2]),
        }
        chars = {"E1": lambda z: cmath.exp(z[0] - z[0].conjugate())}
        return coframe, chars, 4
    if name == "nilfamily_ft":
        a2, a3, a5 = params["a2"], params["a3"], params["a5"]
        a10, a12 = params["a10"], params["a12"]
        coframe = {
            1: CoordForm.dz(1),
            2: CoordForm.dz(2),
            3: CoordForm.dz(3),
            4: CoordForm.dz(4)
            + CoordForm.dz(
                1,
                lambda z: -(a2 * z[2] + a3 * z[0].conjugate()
                            + a5 * z[2].conjugate()),
            )
            + CoordForm.dz(
                3,
                lambda z: -(a10 * z[0].conjugate() + a12 * z[2].conjugate()),
            ),
        }
        return coframe, {}, 4
    if name == "fps_family":
        va, vb, vc = params["A"], params["B"], params["C"]
        vd, ve = params["D"], params["E"]
        coframe = {
            1: CoordForm.dz(1),
            2: CoordForm.dz(2),
            3: CoordForm.dz(3)
            + CoordForm.dz(
                1,
                lambda z: -(ve * z[1] + vc * z[0].conjugate()
                            + vd * z[1].conjugate()),
            )
            + CoordForm.dz(
                2,
                lambda z: va * z[0].conjugate() + vb * z[1].conjugate(),
            ),
        }
        return coframe, {}, 3
    raise KeyError(name)


def realize(form: Form, coframe, chars, point_params):
    """Engine form -> coordinate form, coefficients evaluated along z."""
    anti = {k: f.conjugate() for k, f in coframe.items()}
    out = CoordForm()
    for mi, c in form.terms():
        def coeff_fn(z, c=c):
            values = dict(point_params)
            for cname, fn in chars.items():
                e = fn(z)
                values[cname] = e
            return c.numeric(values)

        piece = CoordForm.scalar(coeff_fn)
        for j in mi.holo:
            piece = piece.wedge(coframe[j])
        for j in mi.anti:
            piece = piece.wedge(anti[j])
        out = out + piece
    return out


def numeric_point(registered_pairs, values):
    """Point dict with conjugate partners filled in."""
    out = {}
    for name, val in values.items():
        out[name] = val
        if name in registered_pairs:
            out[registered_pairs[name]] = complex(val).conjugate()
    return out


def max_deviation(lhs: CoordForm, rhs: CoordForm, points):
    worst = 0.0
    for z in points:
        left = lhs.at(z)
        right = rhs.at(z)
        for key in set(left) | set(right):
            worst = max(
                worst, abs(left.get(key, 0j) - right.get(key, 0j))
            )
    return worst


def rational_complex(rng, spread=4):
    """Small Gaussian-rational sample value as an exact Fraction pair."""
    num = Fraction(rng.randint(-spread, spread), rng.randint(1, spread) * 4)
    den = Fraction(rng.randint(-spread, spread), rng.randint(1, spread) * 4)
    return num, den


def sample_points(rng, n, count=3):
    pts = []
    for _ in range(count):
        pts.append(tuple(
            complex(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8))
            for _ in range(n)
        ))
    return pts
