"""Multi-index combinatorics: gradings, population predicates, enumeration.

A multi-index beta is a finitely supported map on {3} | N_0^{1+d}: it counts
occurrences of the cubic symbol (key 3) and of polynomial decorations
n = (n0, ..., nd).  Conventions used throughout the package:

    |n|        = 2*n0 + n1 + ... + nd          (parabolic weight of a decoration)
    |beta|     = alpha + beta(3)*2*(1+alpha) + sum_n beta(n)*(|n| - alpha)
    [beta]     = 2*beta(3) - sum_n beta(n)     (noise homogeneity minus one)
    |beta|_<   = |beta| + (D/2)*([beta] + 1)   (the induction ordinal)

with alpha = 2 + s - D/2 and D = 2 + d.  A multi-index is *populated* when
its model coefficient may be non-zero: beta = 0, beta purely polynomial
(beta = delta_n), beta of the cubic-polynomial form delta_3 + three
decorations, or [beta] >= 0.

All values are immutable; exact arithmetic is used whenever the regularity
exponent s is given as a Fraction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

SpaceIndex = tuple  # (n0, n1, ..., nd), non-negative ints; n0 is the time slot


def parabolic_weight(n: SpaceIndex) -> int:
    """|n| = 2*n0 + n1 + ... + nd; zero iff n is the zero decoration."""
    return 2 * n[0] + sum(n[1:])


def zero_index(d: int) -> SpaceIndex:
    return (0,) * (1 + d)


def unit_index(d: int, i: int) -> SpaceIndex:
    """Decoration e_i; i = 0 is the time direction."""
    n = [0] * (1 + d)
    n[i] = 1
    return tuple(n)


class MultiIndex:
    """Immutable sparse multi-index over {3} | N_0^{1+d}.

    `count3` is the multiplicity of the cubic symbol, `poly` maps decorations
    to strictly positive multiplicities.
    """

    __slots__ = ("count3", "poly", "_hash")

    def __init__(self, count3=0, poly=None):
        if count3 < 0:
            raise ValueError("count3 must be non-negative")
        items = []
        if poly:
            for n, m in (poly.items() if isinstance(poly, dict) else poly):
                n = tuple(int(v) for v in n)
                if any(v < 0 for v in n):
                    raise ValueError("decorations must be non-negative")
                if m < 0:
                    raise ValueError("multiplicities must be non-negative")
                if m:
                    items.append((n, int(m)))
        items.sort()
        object.__setattr__(self, "count3", int(count3))
        object.__setattr__(self, "poly", tuple(items))
        object.__setattr__(self, "_hash", hash((self.count3, self.poly)))

    def __setattr__(self, *a):
        raise AttributeError("MultiIndex is immutable")

    # -- basic queries ----------------------------------------------------
    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return (isinstance(other, MultiIndex)
                and self.count3 == other.count3 and self.poly == other.poly)

    def __bool__(self):
        return bool(self.count3 or self.poly)

    def multiplicity(self, n: SpaceIndex) -> int:
        return dict(self.poly).get(tuple(n), 0)

    @property
    def poly_total(self) -> int:
        """sum_n beta(n)"""
        return sum(m for _, m in self.poly)

    @property
    def length(self) -> int:
        """Plain length beta(3) + sum_n beta(n)."""
        return self.count3 + self.poly_total

    def decorations(self):
        """Decorations listed with multiplicity (a sorted tuple)."""
        out = []
        for n, m in self.poly:
            out.extend([n] * m)
        return tuple(out)

    def sort_key(self):
        return (self.count3, self.poly)

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        merged = dict(self.poly)
        for n, m in other.poly:
            merged[n] = merged.get(n, 0) + m
        return MultiIndex(self.count3 + other.count3, merged)

    def __sub__(self, other):
        merged = dict(self.poly)
        for n, m in other.poly:
            merged[n] = merged.get(n, 0) - m
            if merged[n] < 0:
                raise ValueError("difference is not a multi-index")
        if self.count3 < other.count3:
            raise ValueError("difference is not a multi-index")
        return MultiIndex(self.count3 - other.count3, merged)

    def __le__(self, other):
        if self.count3 > other.count3:
            return False
        om = dict(other.poly)
        return all(om.get(n, 0) >= m for n, m in self.poly)

    def sub_indices(self):
        """All multi-indices gamma <= self (componentwise)."""
        keys = [n for n, _ in self.poly]
        ranges = [range(m + 1) for _, m in self.poly]
        out = []
        for k in range(self.count3 + 1):
            for mults in itertools.product(*ranges):
                out.append(MultiIndex(k, dict(zip(keys, mults))))
        return out

    # -- text form ---------------------------------------------------------
    def __repr__(self):
        return f"MultiIndex('{self.text()}')"

    def text(self) -> str:
        """Canonical text form `k|n1:m1,n2:m2,...`, e.g. `1|(0,0):1`."""
        parts = ",".join(
            "(" + ",".join(str(v) for v in n) + f"):{m}" for n, m in self.poly)
        return f"{self.count3}|{parts}"

    @staticmethod
    def parse(s: str) -> "MultiIndex":
        head, _, tail = s.strip().partition("|")
        count3 = int(head)
        poly = {}
        tail = tail.strip()
        while tail:
            if not tail.startswith("("):
                raise ValueError(f"bad multi-index text {s!r}")
            close = tail.index(")")
            n = tuple(int(v) for v in tail[1:close].split(","))
            rest = tail[close + 1:]
            if not rest.startswith(":"):
                raise ValueError(f"bad multi-index text {s!r}")
            comma = rest.find(",(")
            if comma == -1:
                m, tail = rest[1:], ""
            else:
                m, tail = rest[1:comma], rest[comma + 1:]
            n_key = n
            if n_key in poly:
                raise ValueError(f"duplicate decoration in {s!r}")
            poly[n_key] = int(m)
        return MultiIndex(count3, poly)


def kdelta3(k: int) -> MultiIndex:
    return MultiIndex(k, {})


def delta_n(n: SpaceIndex) -> MultiIndex:
    return MultiIndex(0, {tuple(n): 1})


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters: spatial dimension d, noise regularity s,
    torus side L and mollification scale rho.

    Derived: D = 2 + d (effective parabolic dimension) and
    alpha = 2 + s - D/2, constrained to (-1, 0) with 3*alpha + D/2 > 0.
    Exact (Fraction) arithmetic is used for the gradings when s is a
    Fraction.
    """

    d: int = 1
    s: object = -0.745
    L: float = 1.0
    rho: float = 1.0 / 64.0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.D < 3:
            raise ValueError("need D = 2 + d >= 3")
        a = self.alpha
        if not (-1 < a < 0):
            raise ValueError(f"alpha = {a} outside (-1, 0)")
        if not 3 * a + Fraction(self.D, 2) > 0:
            raise ValueError(f"3*alpha + D/2 = {3 * a + self.D / 2} <= 0")
        if not (0 < self.rho < self.L):
            raise ValueError("need 0 < rho < L")

    @property
    def D(self) -> int:
        return 2 + self.d

    @property
    def alpha(self):
        return 2 + self.s - self.half_D

    @property
    def half_D(self):
        return Fraction(self.D, 2) if isinstance(self.s, Fraction) else self.D / 2

    @property
    def exact(self) -> bool:
        return isinstance(self.s, Fraction)


def homogeneity(beta: MultiIndex, p: ModelParams):
    """|beta| = alpha + beta(3)*2*(1+alpha) + sum_n beta(n)*(|n|-alpha)."""
    a = p.alpha
    h = a + beta.count3 * 2 * (1 + a)
    for n, m in beta.poly:
        h += m * (parabolic_weight(n) - a)
    return h


def noise_homogeneity(beta: MultiIndex) -> int:
    """[beta] = 2*beta(3) - sum_n beta(n); [beta]+1 counts noise factors."""
    return 2 * beta.count3 - beta.poly_total


def poly_weight(gamma: MultiIndex) -> int:
    """|gamma|_p = sum_n |n|*gamma(n)."""
    return sum(m * parabolic_weight(n) for n, m in gamma.poly)


def precedence(beta: MultiIndex, p: ModelParams):
    """The induction ordinal |beta|_< = |beta| + (D/2)*([beta]+1)."""
    return homogeneity(beta, p) + p.half_D * (noise_homogeneity(beta) + 1)


# population classes
ZERO = "zero"
PURELY_POLYNOMIAL = "purely_polynomial"
CUBIC_POLY_FORM = "cubic_poly_form"
NOISE_NONNEG = "noise_nonneg"
UNPOPULATED = "unpopulated"


def classify(beta: MultiIndex) -> str:
    """Population class of beta; everything but UNPOPULATED is populated."""
    if not beta:
        return ZERO
    if beta.count3 == 0 and beta.poly_total == 1:
        return PURELY_POLYNOMIAL
    if beta.count3 == 1 and beta.poly_total == 3:
        # noise homogeneity is 2 - 3 = -1 < 0 here
        return CUBIC_POLY_FORM
    if not beta.poly and beta.count3 == 0:
        return ZERO
    if noise_homogeneity(beta) >= 0:
        return NOISE_NONNEG
    return UNPOPULATED


def is_populated(beta: MultiIndex) -> bool:
    return classify(beta) != UNPOPULATED


def is_purely_polynomial(beta: MultiIndex) -> bool:
    return classify(beta) == PURELY_POLYNOMIAL


def counterterm_range(p: ModelParams) -> set:
    """Degrees k with 0 < k < 1/(1+alpha); exactly these c_k may be non-zero."""
    bound = 1 / (1 + p.alpha)
    ks = set()
    k = 1
    while k < bound:
        ks.add(k)
        k += 1
    return ks


def multinomial_sigma(beta: MultiIndex) -> int:
    """(sum_m beta(m))! / prod_m beta(m)! for the cubic-polynomial class."""
    if classify(beta) != CUBIC_POLY_FORM:
        raise ValueError(f"{beta.text()} is not of cubic-polynomial form")
    num = math.factorial(beta.poly_total)
    den = 1
    for _, m in beta.poly:
        den *= math.factorial(m)
    return num // den


def _decoration_alphabet(d: int, max_weight, support=None):
    """All decorations n with |n| <= max_weight, optionally restricted."""
    if max_weight < 0:
        return []
    w = int(max_weight)
    out = []
    for n0 in range(w // 2 + 1):
        rest = w - 2 * n0
        for sp in itertools.product(range(rest + 1), repeat=d):
            if sum(sp) <= rest:
                n = (n0,) + sp
                if support is None or n in support:
                    out.append(n)
    return sorted(out, key=lambda n: (parabolic_weight(n), n))


def enumerate_populated(cutoff, p: ModelParams, support=None,
                        grading: str = "precedence"):
    """All populated beta with grading value < cutoff, sorted by
    (grading value, plain length, lexicographic key).

    `grading` selects the truncation functional: "precedence" (the induction
    ordinal, used for model truncation) or "homogeneity" (plain |beta|, used
    e.g. for the counterterm classes |beta| < 2).  `support`, when given,
    restricts the allowed decorations, e.g. {(0,)*(1+d)}.

    Finiteness: populated beta satisfy sum_n beta(n) <= 2*beta(3) + 1, and
    both gradings grow at least linearly in beta(3) (|beta|_< >= 2*beta(3)),
    so the search space below any finite cutoff is finite.
    """
    if not math.isfinite(float(cutoff)):
        raise ValueError("cutoff must be finite")
    a = p.alpha
    if support is not None:
        support = {tuple(n) for n in support}
    grading_fn = {"precedence": precedence, "homogeneity": homogeneity}[grading]

    # Adding a decoration n changes the grading by |n| - shift.
    shift = (p.half_D + a) if grading == "precedence" else a

    out = []

    def collect(k):
        base = MultiIndex(k, {})
        g0 = grading_fn(base, p)
        if is_populated(base) and g0 < cutoff:
            out.append((g0, base))
        max_l = 2 * k + 1
        if max_l == 0:
            return
        # widest single decoration; with shift > 0 the other slots can each
        # contribute -shift (weight-0 decorations), otherwise they only add
        max_w = math.floor(float(cutoff - g0 + (max_l * shift if shift > 0 else shift)))
        alphabet = _decoration_alphabet(p.d, max(max_w, -1), support)

        def extend(decs, g, start):
            l = len(decs)
            if l > 0:
                beta = MultiIndex(k, _multiset(decs))
                if is_populated(beta) and g < cutoff:
                    out.append((g, beta))
            if l == max_l:
                return
            slots_left = max_l - l - 1
            # cheapest completion: remaining slots may stay empty, or (when a
            # zero-weight decoration lowers the grading, shift > 0) be filled
            # with weight-0 decorations at -shift each
            floor_gain = -slots_left * shift if shift > 0 else 0
            for i in range(start, len(alphabet)):
                n = alphabet[i]
                g_new = g + parabolic_weight(n) - shift
                if g_new + floor_gain >= cutoff:
                    break  # alphabet sorted by weight; later n only larger
                extend(decs + (n,), g_new, i)

        extend((), g0, 0)

    def _multiset(decs):
        m = {}
        for n in decs:
            m[n] = m.get(n, 0) + 1
        return m

    # |beta|_< >= 2k on the populated set; |beta| >= alpha + 2k(1+alpha).
    k = 0
    while True:
        k_floor = 2 * k if grading == "precedence" else a + 2 * k * (1 + a)
        if k > 0 and k_floor >= cutoff:
            break
        collect(k)
        k += 1
        if k > 10_000:
            raise RuntimeError("enumeration failed to terminate")

    out.sort(key=lambda t: (t[0], t[1].length, t[1].sort_key()))
    return [beta for _, beta in out]
