"""Symbolic recursion for the forcing coefficients.

The component maps are built from the fixed-point identity for the forcing
series: the cubic contribution sums over unordered triples of populated
indices, the counterterm contributes c_k against the remaining factor, and
the noise sits in the zero component only:

    PiMinus[beta] = sum_{d3+b1+b2+b3=beta} Pi[b1] Pi[b2] Pi[b3]
                  + sum_{k>=1, k*d3<=beta} c_k Pi[beta - k*d3]
                  + xi * 1_{beta=0}

Purely polynomial symbols Pi[delta_n] are substituted by monomial markers
(y^n, with y^0 = 1), and symbols whose coefficient provably vanishes
(unpopulated indices, and the cubic-polynomial class under the first
variation) are dropped.  The first-variation expression applies the Leibniz
rule and is linear in the dPi / dxi symbols.

Expressions are canonical: terms merged by factor signature with integer
coefficients, deterministic ordering, stable text grammar
(`3*Pi[0]^2 + c[1]`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .grading import (
    CUBIC_POLY_FORM, PURELY_POLYNOMIAL, MultiIndex, classify, delta_n,
    homogeneity, is_populated, kdelta3, multinomial_sigma,
    noise_homogeneity, parabolic_weight, poly_weight,
)

NOISE_NONE = ""
NOISE_XI = "xi"
NOISE_DXI = "dxi"


def _field_bearing(beta: MultiIndex) -> bool:
    """True when the Pi symbol of beta can be non-zero and is not purely
    polynomial, i.e. beta = 0 or [beta] >= 0."""
    c = classify(beta)
    return c not in (PURELY_POLYNOMIAL, CUBIC_POLY_FORM) and is_populated(beta)


@dataclass(frozen=True)
class Term:
    """One canonical summand: coeff * prod Pi[g] * (dPi[g']) * prod c[k]
    * y^poly * noise."""

    coeff: int
    pi_factors: tuple = ()          # sorted MultiIndex tuple, with repetition
    c_factors: tuple = ()           # sorted tuple of positive ints
    delta_factor: Optional[MultiIndex] = None
    noise: str = NOISE_NONE
    poly: tuple = ()                # accumulated monomial exponent; () means y^0

    def signature(self):
        return (tuple(sorted(f.sort_key() for f in self.pi_factors)),
                self.c_factors,
                self.delta_factor.sort_key() if self.delta_factor else None,
                self.noise, self.poly)

    def sort_key(self):
        return (self.c_factors,
                -len(self.pi_factors),
                tuple(sorted((f.sort_key() for f in self.pi_factors), reverse=True)),
                self.delta_factor.sort_key() if self.delta_factor else (),
                self.noise, self.poly)

    def text(self) -> str:
        bits = []
        if self.coeff != 1 or not (self.pi_factors or self.c_factors
                                   or self.delta_factor or self.noise or any(self.poly)):
            bits.append(str(self.coeff))
        for k, grp in itertools.groupby(self.c_factors):
            m = len(list(grp))
            bits.append(f"c[{k}]" + (f"^{m}" if m > 1 else ""))
        for f, grp in itertools.groupby(self.pi_factors):
            m = len(list(grp))
            name = f.text().rstrip("|") if not f.poly else f.text()
            bits.append(f"Pi[{name}]" + (f"^{m}" if m > 1 else ""))
        if any(self.poly):
            bits.append("y^(" + ",".join(str(v) for v in self.poly) + ")")
        if self.delta_factor is not None:
            name = (self.delta_factor.text().rstrip("|")
                    if not self.delta_factor.poly else self.delta_factor.text())
            bits.append(f"dPi[{name}]")
        if self.noise:
            bits.append(self.noise)
        return "*".join(bits)


@dataclass(frozen=True)
class Expr:
    terms: tuple

    @staticmethod
    def from_terms(terms) -> "Expr":
        merged = {}
        for t in terms:
            sig = t.signature()
            if sig in merged:
                old = merged[sig]
                merged[sig] = Term(old.coeff + t.coeff, old.pi_factors,
                                   old.c_factors, old.delta_factor,
                                   old.noise, old.poly)
            else:
                merged[sig] = t
        kept = [t for t in merged.values() if t.coeff != 0]
        kept.sort(key=Term.sort_key)
        return Expr(tuple(kept))

    def text(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(t.text() for t in self.terms)

    def to_jsonable(self):
        return [{"coeff": t.coeff,
                 "pi": [f.text() for f in t.pi_factors],
                 "c": list(t.c_factors),
                 "dpi": t.delta_factor.text() if t.delta_factor else None,
                 "noise": t.noise,
                 "poly": list(t.poly)}
                for t in self.terms]

    def __iter__(self):
        return iter(self.terms)


def _poly_add(p1: tuple, p2: tuple) -> tuple:
    if not p1:
        return p2
    if not p2:
        return p1
    return tuple(a + b for a, b in zip(p1, p2))


def _unordered_triples(total: MultiIndex):
    """Unordered decompositions b1+b2+b3 = total with ordered multiplicity."""
    subs = sorted(total.sub_indices(), key=MultiIndex.sort_key)
    for i, b1 in enumerate(subs):
        rest1 = total - b1
        for b2 in sorted(rest1.sub_indices(), key=MultiIndex.sort_key):
            if b2.sort_key() < b1.sort_key():
                continue
            b3 = rest1 - b2
            if b3.sort_key() < b2.sort_key():
                continue
            yield (b1, b2, b3), {3: 6, 2: 3, 1: 1}[len({b1, b2, b3})]


def _split_factors(parts, substitute_pp):
    """Sort the Pi factors of a term into symbol factors and a monomial
    marker; None signals a provably vanishing factor."""
    pis, poly = [], ()
    for g in parts:
        cls = classify(g)
        if not is_populated(g) or cls == CUBIC_POLY_FORM:
            return None  # coefficient vanishes
        if cls == PURELY_POLYNOMIAL and substitute_pp:
            n = g.poly[0][0]
            poly = _poly_add(poly, n)
        else:
            pis.append(g)
    return tuple(sorted(pis, key=MultiIndex.sort_key)), poly


def pi_minus_expr(beta: MultiIndex, substitute_pp: bool = True) -> Expr:
    """Symbolic forcing coefficient at beta."""
    terms = []
    if not beta:
        terms.append(Term(1, noise=NOISE_XI))
    if beta.count3 >= 1:
        rest = beta - kdelta3(1)
        for (b1, b2, b3), mult in _unordered_triples(rest):
            split = _split_factors((b1, b2, b3), substitute_pp)
            if split is None:
                continue
            pis, poly = split
            terms.append(Term(mult, pi_factors=pis, poly=poly))
        for k in range(1, beta.count3 + 1):
            b2 = beta - kdelta3(k)
            split = _split_factors((b2,), substitute_pp)
            if split is None:
                continue
            pis, poly = split
            terms.append(Term(1, pi_factors=pis, c_factors=(k,), poly=poly))
    return Expr.from_terms(terms)


def delta_pi_minus_expr(beta: MultiIndex, substitute_pp: bool = True) -> Expr:
    """First variation of the forcing coefficient; linear in dPi / dxi.

    Leibniz on the cubic term puts the variation on one of three slots; the
    variation of a purely polynomial or otherwise deterministic coefficient
    vanishes, so the surviving dPi factors all carry [gamma] >= 0.
    """
    terms = []
    if not beta:
        terms.append(Term(1, noise=NOISE_DXI))
    if beta.count3 >= 1:
        rest = beta - kdelta3(1)
        # distinguished delta slot: 3 * Pi[b1] Pi[b2] dPi[b3], unordered (b1,b2)
        for b3 in sorted(rest.sub_indices(), key=MultiIndex.sort_key):
            if not _field_bearing(b3):
                continue
            rest2 = rest - b3
            for b1 in sorted(rest2.sub_indices(), key=MultiIndex.sort_key):
                b2 = rest2 - b1
                if b2.sort_key() < b1.sort_key():
                    continue
                pair_mult = 1 if b1 == b2 else 2
                split = _split_factors((b1, b2), substitute_pp)
                if split is None:
                    continue
                pis, poly = split
                terms.append(Term(3 * pair_mult, pi_factors=pis, poly=poly,
                                  delta_factor=b3))
        for k in range(1, beta.count3 + 1):
            b2 = beta - kdelta3(k)
            if _field_bearing(b2):
                terms.append(Term(1, c_factors=(k,), delta_factor=b2))
    return Expr.from_terms(terms)


def polynomial_part(beta: MultiIndex):
    """(sigma_beta, n) with PiMinus[beta] = sigma_beta * y^n on the
    cubic-polynomial class."""
    sigma = multinomial_sigma(beta)  # raises on the wrong class
    d_plus_1 = len(beta.poly[0][0])
    n = [0] * d_plus_1
    for m, mult in beta.poly:
        for i, v in enumerate(m):
            n[i] += mult * v
    return sigma, tuple(n)


# ------------------------------------------------------------------ trees
class UnsupportedTreeError(ValueError):
    pass


def _tree_product(children) -> str:
    """Canonical product string of child trees (sorted, with powers)."""
    if not children:
        return "1"
    out = []
    for c, grp in itertools.groupby(sorted(children)):
        m = len(list(grp))
        out.append(c + (f"^{m}" if m > 1 else ""))
    return "*".join(out)


def tree_expand(beta: MultiIndex) -> dict:
    """Decorated-tree expansion of the forcing coefficient at beta, with the
    counterterm contributions dropped.  Integration is written I[.], the
    noise leaf Xi, monomial markers X^(n); multiplication attaches trees at
    the root.  Verified dictionary range: populated beta with beta(3) <= 2.
    """
    if not is_populated(beta):
        raise UnsupportedTreeError(f"{beta.text()} is not populated")
    if beta.count3 > 2:
        raise UnsupportedTreeError(
            f"tree dictionary only covers beta(3) <= 2, got {beta.text()}")

    def expand(b: MultiIndex) -> dict:
        out = {}
        for term in pi_minus_expr(b, substitute_pp=True):
            if term.c_factors:
                continue  # renormalization part dropped in the dictionary
            factor_maps = []
            if term.noise:
                factor_maps.append({("Xi",): 1})
            if any(term.poly):
                marker = "X^(" + ",".join(str(v) for v in term.poly) + ")"
                factor_maps.append({(marker,): 1})
            for g in term.pi_factors:
                sub = expand(g)
                factor_maps.append(
                    {("I[" + t + "]",): c for t, c in sub.items()})
            # multiply the factors out
            acc = {(): term.coeff}
            for fm in factor_maps:
                new = {}
                for forest, c in acc.items():
                    for leafs, c2 in fm.items():
                        key = tuple(sorted(forest + leafs))
                        new[key] = new.get(key, 0) + c * c2
                acc = new
            for forest, c in acc.items():
                t = _tree_product(forest)
                out[t] = out.get(t, 0) + c
        return {t: c for t, c in out.items() if c}

    return expand(beta)


# ------------------------------------------------------------- dependencies
@dataclass
class DependencyReport:
    beta: MultiIndex
    gammas: list              # non-pp Pi symbols appearing
    ks: list                  # counterterm degrees appearing
    diagonal_counterterm: bool
    cubic_strictness_ok: bool       # gamma(3) < beta(3)
    homogeneity_strictness_ok: bool  # |gamma| < |beta|
    c_semi_strictness_ok: bool      # k <= beta(3)
    c_strictness_ok: bool           # k < beta(3) off the diagonal (class II)


def dependency_report(beta: MultiIndex, p) -> DependencyReport:
    expr = pi_minus_expr(beta, substitute_pp=True)
    gammas, ks = set(), set()
    diagonal = False
    for t in expr:
        gammas.update(t.pi_factors)
        for k in t.c_factors:
            ks.add(k)
            if k == beta.count3 and not t.pi_factors and not any(t.poly):
                diagonal = True
    h_beta = homogeneity(beta, p)
    return DependencyReport(
        beta=beta,
        gammas=sorted(gammas, key=MultiIndex.sort_key),
        ks=sorted(ks),
        diagonal_counterterm=diagonal,
        cubic_strictness_ok=all(g.count3 < beta.count3 for g in gammas),
        homogeneity_strictness_ok=all(homogeneity(g, p) < h_beta for g in gammas),
        c_semi_strictness_ok=all(k <= beta.count3 for k in ks),
        c_strictness_ok=all(k < beta.count3 for k in ks if not (
            k == beta.count3 and diagonal)),
    )


# ----------------------------------------------------- bookkeeping checks
def term_noise_homogeneity(term: Term) -> int:
    """Total noise-counting weight of a term: [gamma]+1 per Pi factor, 2k
    per c_k, 1 for the noise symbol, [gamma]+1 for a dPi factor."""
    total = sum(noise_homogeneity(g) + 1 for g in term.pi_factors)
    total += sum(2 * k for k in term.c_factors)
    if term.delta_factor is not None:
        total += noise_homogeneity(term.delta_factor) + 1
    if term.noise:
        total += 1
    return total


def term_homogeneity(term: Term, p):
    """Total parabolic homogeneity of a term under the counting rules:
    Pi[g] and dPi[g] carry |g|, c_k carries 2k(1+alpha) - 2, the noise
    carries alpha - 2, monomial markers carry |n|."""
    a = p.alpha
    total = sum(homogeneity(g, p) for g in term.pi_factors)
    total += sum(2 * k * (1 + a) - 2 for k in term.c_factors)
    if term.delta_factor is not None:
        total += homogeneity(term.delta_factor, p)
    if term.noise:
        total += a - 2
    if term.poly:
        total += parabolic_weight(term.poly)
    return total
