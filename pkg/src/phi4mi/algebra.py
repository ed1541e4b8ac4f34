"""Formal power series over multi-indices and column-finite endomorphisms.

A Series holds a sparse map MultiIndex -> coefficient, truncated by the
induction ordinal |.|_<: only indices with |beta|_< < cutoff are stored.
The coefficient algebra is pluggable: anything supporting +, *, scalar
multiplication and a zero test works (floats, Fractions, complex numbers,
numpy arrays, lattice fields).  The product is the Cauchy rule

    (a b)_beta = sum_{beta1 + beta2 = beta} a_beta1 * b_beta2 ,

the coordinate derivations act by (d_n a)_beta = (beta(n)+1) * a_{beta+delta_n},
and endomorphisms act row-wise, (G a)_beta = sum_gamma G_beta^gamma a_gamma.

Truncating by |.|_< (rather than by |.|) keeps every recursion in the
package closed: the change-of-base-point and first-variation endomorphisms
are strictly triangular in this ordinal, which also powers the Neumann-series
inversion of unitriangular endomorphisms.
"""

from __future__ import annotations

import itertools
import json

from .grading import MultiIndex, ModelParams, delta_n, precedence


def is_zero_coeff(c) -> bool:
    try:
        return c == 0
    except Exception:
        pass
    try:
        import numpy as np
        return not np.any(c)
    except Exception:
        return False


def coeff_norm(c) -> float:
    """Magnitude used by the numerical check harnesses."""
    if hasattr(c, "norm_inf"):
        return float(c.norm_inf())
    try:
        import numpy as np
        if isinstance(c, np.ndarray):
            return float(np.max(np.abs(c))) if c.size else 0.0
    except Exception:
        pass
    return abs(c)


class Series:
    """Truncated formal power series with pluggable coefficients."""

    __slots__ = ("coeffs", "params", "cutoff")

    def __init__(self, coeffs, params: ModelParams, cutoff):
        self.params = params
        self.cutoff = cutoff
        kept = {}
        for beta, c in coeffs.items():
            if precedence(beta, params) < cutoff and not is_zero_coeff(c):
                kept[beta] = c
        self.coeffs = kept

    @classmethod
    def zero(cls, params, cutoff):
        return cls({}, params, cutoff)

    @classmethod
    def unit(cls, params, cutoff, one=1):
        return cls({MultiIndex(): one}, params, cutoff)

    @classmethod
    def monomial(cls, beta: MultiIndex, params, cutoff, coeff=1):
        return cls({beta: coeff}, params, cutoff)

    def __getitem__(self, beta):
        return self.coeffs.get(beta, 0)

    def __len__(self):
        return len(self.coeffs)

    def _check_compatible(self, other):
        if self.params is not other.params and self.params != other.params:
            raise ValueError("series have different parameters")
        if self.cutoff != other.cutoff:
            raise ValueError("series have different truncations")

    def __add__(self, other):
        self._check_compatible(other)
        out = dict(self.coeffs)
        for b, c in other.coeffs.items():
            out[b] = out[b] + c if b in out else c
        return Series(out, self.params, self.cutoff)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, a):
        return Series({b: a * c for b, c in self.coeffs.items()},
                      self.params, self.cutoff)

    def __mul__(self, other):
        self._check_compatible(other)
        out = {}
        for b1, c1 in self.coeffs.items():
            for b2, c2 in other.coeffs.items():
                b = b1 + b2
                if precedence(b, self.params) >= self.cutoff:
                    continue
                prod = c1 * c2
                out[b] = out[b] + prod if b in out else prod
        return Series(out, self.params, self.cutoff)

    def norm_inf(self):
        return max((coeff_norm(c) for c in self.coeffs.values()), default=0.0)

    def map_coeffs(self, fn):
        return Series({b: fn(c) for b, c in self.coeffs.items()},
                      self.params, self.cutoff)

    def to_jsonable(self, render=None):
        render = render or (lambda c: c if isinstance(c, (int, float)) else str(c))
        return {b.text(): render(c)
                for b, c in sorted(self.coeffs.items(), key=lambda t: t[0].sort_key())}

    def __repr__(self):
        body = ", ".join(f"{b.text()}: {c}" for b, c in
                         sorted(self.coeffs.items(), key=lambda t: t[0].sort_key()))
        return f"Series({{{body}}})"


def series_multiply(a: Series, b: Series) -> Series:
    return a * b


def embed_counterterm(c_values: dict, params, cutoff) -> Series:
    """The counterterm as a power series: coefficient c_k at k*delta_3."""
    coeffs = {}
    for k, v in c_values.items():
        if k <= 0:
            raise ValueError("counterterm degrees must be positive")
        coeffs[MultiIndex(int(k), {})] = v
    return Series(coeffs, params, cutoff)


def derivation_apply(n, a: Series) -> Series:
    """Coordinate derivation: (d_n a)_beta = (beta(n)+1) a_{beta+delta_n}."""
    dn = delta_n(n)
    out = {}
    for b, c in a.coeffs.items():
        m = b.multiplicity(n)
        if m:
            target = b - dn
            out[target] = out.get(target, 0) + m * c
    return Series(out, a.params, a.cutoff)


class Endo:
    """Sparse matrix (beta, gamma) -> entry with finitely many gamma per row.

    Rows are stored explicitly: a missing row acts as zero.  Endos built in
    this package carry every row of the truncated index set they operate on.
    """

    __slots__ = ("rows",)

    def __init__(self, rows=None):
        self.rows = {}
        if rows:
            for b, row in rows.items():
                kept = {g: v for g, v in row.items() if not is_zero_coeff(v)}
                self.rows[b] = kept

    @classmethod
    def identity(cls, index_set):
        return cls({b: {b: 1} for b in index_set})

    def entry(self, beta, gamma):
        return self.rows.get(beta, {}).get(gamma, 0)

    def index_set(self):
        return set(self.rows)

    def column_support(self):
        cols = set()
        for row in self.rows.values():
            cols.update(row)
        return cols

    def apply(self, a: Series) -> Series:
        out = {}
        for b, row in self.rows.items():
            if precedence(b, a.params) >= a.cutoff:
                continue
            acc = None
            for g, v in row.items():
                c = a.coeffs.get(g)
                if c is None:
                    continue
                term = v * c
                acc = term if acc is None else acc + term
            if acc is not None:
                out[b] = acc
        return Series(out, a.params, a.cutoff)

    def compose(self, other: "Endo") -> "Endo":
        """(self . other): apply `other` first in matrix convention
        (self*other)_beta^gamma = sum_mu self_beta^mu other_mu^gamma."""
        rows = {}
        for b, row in self.rows.items():
            acc = {}
            for mu, v in row.items():
                for g, w in other.rows.get(mu, {}).items():
                    acc[g] = acc.get(g, 0) + v * w
            rows[b] = acc
        return Endo(rows)

    def add(self, other, sign=1):
        rows = {b: dict(r) for b, r in self.rows.items()}
        for b, r in other.rows.items():
            tr = rows.setdefault(b, {})
            for g, v in r.items():
                tr[g] = tr.get(g, 0) + sign * v
        return Endo(rows)

    def max_entry_defect(self, other) -> float:
        """Largest |self - other| entry over the union of supports."""
        worst = 0.0
        for b in set(self.rows) | set(other.rows):
            r1, r2 = self.rows.get(b, {}), other.rows.get(b, {})
            for g in set(r1) | set(r2):
                worst = max(worst, coeff_norm(r1.get(g, 0) - r2.get(g, 0)))
        return worst

    def inverse(self, params: ModelParams) -> "Endo":
        """Neumann-series inverse for unitriangular endomorphisms.

        Requires unit diagonal and all off-diagonal entries strictly lower
        in |.|_<; nilpotency of the off-diagonal part then guarantees the
        series terminates.
        """
        n_part = {}
        for b, row in self.rows.items():
            pb = precedence(b, params)
            off = {}
            for g, v in row.items():
                if g == b:
                    if abs(v - 1) > 1e-12:
                        raise ValueError(f"diagonal entry at {b.text()} is {v}, not 1")
                    continue
                if not is_zero_coeff(v):
                    if precedence(g, params) >= pb:
                        raise ValueError(
                            f"entry ({b.text()}, {g.text()}) not strictly lower")
                    off[g] = v
            n_part[b] = off
        n = Endo(n_part)
        result = Endo.identity(self.rows)
        power = Endo.identity(self.rows)
        sign = 1
        for _ in range(len(self.rows) + 1):
            power = power.compose(n)
            sign = -sign
            if not any(power.rows.values()):
                return result
            result = result.add(power, sign=sign)
        raise RuntimeError("Neumann series did not terminate")

    def to_jsonable(self, render=None):
        render = render or (lambda c: c if isinstance(c, (int, float)) else str(c))
        out = {}
        for b in sorted(self.rows, key=lambda x: x.sort_key()):
            row = self.rows[b]
            out[b.text()] = {g.text(): render(v) for g, v in
                             sorted(row.items(), key=lambda t: t[0].sort_key())}
        return out

    def dump_json(self, fp, render=None):
        json.dump(self.to_jsonable(render), fp, indent=1)


def endo_apply(G: Endo, a: Series) -> Series:
    return G.apply(a)


def endo_compose(G: Endo, H: Endo) -> Endo:
    return G.compose(H)


def derivation_endo(n, index_set) -> Endo:
    """Matrix of the coordinate derivation on a given truncated index set."""
    dn = delta_n(n)
    rows = {}
    for b in index_set:
        g = b + dn
        rows[b] = {g: g.multiplicity(n)}
    return Endo(rows)


def multiplicativity_check(G: Endo, samples, params, cutoff) -> float:
    """max over sample pairs (a, b) of || G(ab) - (Ga)(Gb) ||_inf.

    Zero (up to roundoff) certifies that G acts as an algebra endomorphism
    on the truncated series; a useful harness for numerically computed
    change-of-base-point matrices.
    """
    worst = 0.0
    for a, b in samples:
        lhs = G.apply(a * b)
        rhs = G.apply(a) * G.apply(b)
        worst = max(worst, (lhs - rhs).norm_inf())
    return worst
