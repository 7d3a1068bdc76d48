"""Multivariate polynomial templates with symbolic coefficient slots.

A polynomial system is stored symbolically: every term carries a named
coefficient slot, and numeric instances bind slot names to values.  Exponent
vectors are plain tuples of non-negative ints, one entry per variable.
Everything here is immutable after construction and safe to share between
threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

Mono = tuple[int, ...]

# Slot name reserved for the hidden variable introduced by system augmentation.
HIDDEN_SLOT = "u0"


class SystemFormatError(ValueError):
    """Malformed system or instance file; carries line/column when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)


def mono_mul(a: Mono, b: Mono) -> Mono:
    return tuple(x + y for x, y in zip(a, b))


def mono_div(a: Mono, b: Mono) -> Mono | None:
    """Return a/b as an exponent vector, or None if not divisible."""
    q = tuple(x - y for x, y in zip(a, b))
    return q if all(e >= 0 for e in q) else None


@dataclass(frozen=True)
class Term:
    """One term: ``const * slot_value * x^exps``.

    ``slot`` is None for terms with a literal coefficient (used only by the
    generator's extra polynomial; parsed user systems always name a slot).
    """

    slot: str | None
    exps: Mono
    const: float = 1.0

    def __post_init__(self):
        if any(e < 0 for e in self.exps):
            raise SystemFormatError(f"negative exponent in {self.exps}")


@dataclass(frozen=True)
class PolynomialTemplate:
    terms: tuple[Term, ...]

    def __post_init__(self):
        if not self.terms:
            raise SystemFormatError("polynomial with no terms")
        seen: set[Mono] = set()
        for t in self.terms:
            if t.exps in seen:
                raise SystemFormatError(f"duplicate monomial {t.exps} in polynomial")
            seen.add(t.exps)
        slots = [t.slot for t in self.terms if t.slot is not None and t.slot != HIDDEN_SLOT]
        if len(slots) != len(set(slots)):
            raise SystemFormatError("coefficient slot reused within one polynomial")


@dataclass(frozen=True)
class SystemTemplate:
    n_vars: int
    var_names: tuple[str, ...]
    polys: tuple[PolynomialTemplate, ...]

    def __post_init__(self):
        if len(self.var_names) != self.n_vars:
            raise SystemFormatError("var_names length disagrees with n_vars")
        for f in self.polys:
            for t in f.terms:
                if len(t.exps) != self.n_vars:
                    raise SystemFormatError(
                        f"exponent vector {t.exps} has length {len(t.exps)}, expected {self.n_vars}"
                    )

    def slots(self) -> list[str]:
        """All user coefficient slot names, in first-appearance order."""
        out: list[str] = []
        for f in self.polys:
            for t in f.terms:
                if t.slot is not None and t.slot != HIDDEN_SLOT and t.slot not in out:
                    out.append(t.slot)
        return out


CoefficientAssignment = Mapping[str, complex]


@dataclass(frozen=True)
class MonomialOrder:
    """Strict multiplicative total order on exponent vectors.

    kind: "grevlex" (default), "grlex" or "lex"; ``perm`` reorders variables
    before comparison (perm[0] is the most significant variable).
    """

    kind: str = "grevlex"
    perm: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("grevlex", "grlex", "lex"):
            raise ValueError(f"unknown monomial order {self.kind!r}")

    def key(self, mono: Mono):
        """Sort key; larger key = larger monomial."""
        m = mono if self.perm is None else tuple(mono[i] for i in self.perm)
        if self.kind == "lex":
            return m
        if self.kind == "grlex":
            return (sum(m), m)
        # grevlex: higher total degree first; ties broken so that the monomial
        # with the *smaller* last differing exponent is larger.
        return (sum(m), tuple(-e for e in reversed(m)))

    def sort_desc(self, monos: Iterable[Mono]) -> list[Mono]:
        return sorted(monos, key=self.key, reverse=True)


def parse_system(text: str) -> SystemTemplate:
    """Parse a system file (JSON with ``variables`` and ``polynomials``)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SystemFormatError(f"syntax error: {e.msg}", e.lineno, e.colno) from e
    if not isinstance(doc, dict):
        raise SystemFormatError("top level must be an object")
    try:
        names = doc["variables"]
        polys_doc = doc["polynomials"]
    except KeyError as e:
        raise SystemFormatError(f"missing field {e.args[0]!r}") from e
    if not isinstance(names, list) or not names or not all(isinstance(v, str) for v in names):
        raise SystemFormatError("'variables' must be a non-empty list of names")
    n = len(names)
    if not isinstance(polys_doc, list) or not polys_doc:
        raise SystemFormatError("'polynomials' must be a non-empty list")
    polys = []
    for fi, terms_doc in enumerate(polys_doc):
        if not isinstance(terms_doc, list):
            raise SystemFormatError(f"polynomial {fi} must be a list of terms")
        terms = []
        for term_doc in terms_doc:
            try:
                slot, exps = term_doc["coeff"], term_doc["exps"]
            except (TypeError, KeyError):
                raise SystemFormatError(f"bad term {term_doc!r} in polynomial {fi}") from None
            if not isinstance(slot, str):
                raise SystemFormatError(f"slot name must be a string, got {slot!r}")
            if slot == HIDDEN_SLOT:
                raise SystemFormatError(f"slot name {HIDDEN_SLOT!r} is reserved")
            if not isinstance(exps, list) or not all(isinstance(e, int) for e in exps):
                raise SystemFormatError(f"exponents must be a list of ints, got {exps!r}")
            if len(exps) != n:
                raise SystemFormatError(
                    f"exponent vector {exps} has length {len(exps)}, expected {n}"
                )
            if any(e < 0 for e in exps):
                raise SystemFormatError(f"negative exponent in {exps}")
            terms.append(Term(slot, tuple(exps)))
        polys.append(PolynomialTemplate(tuple(terms)))
    return SystemTemplate(n, tuple(names), tuple(polys))


def dump_system(system: SystemTemplate) -> str:
    doc = {
        "variables": list(system.var_names),
        "polynomials": [
            [{"coeff": t.slot, "exps": list(t.exps)} for t in f.terms] for f in system.polys
        ],
    }
    for f in system.polys:
        for t in f.terms:
            if t.slot is None:
                raise ValueError("literal-coefficient terms are not representable in system files")
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def parse_instance(text: str) -> dict[str, float]:
    """Parse an instance file: a flat JSON map slot name -> number."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SystemFormatError(f"syntax error: {e.msg}", e.lineno, e.colno) from e
    if not isinstance(doc, dict):
        raise SystemFormatError("instance file must be a flat object")
    out = {}
    for k, v in doc.items():
        if not isinstance(v, (int, float)):
            raise SystemFormatError(f"value for slot {k!r} is not a number")
        out[str(k)] = float(v)
    return out


def support(f: PolynomialTemplate) -> frozenset[Mono]:
    """Exponent vectors of the polynomial's terms."""
    return frozenset(t.exps for t in f.terms)


def term_value(t: Term, coeffs: CoefficientAssignment) -> complex:
    if t.slot is None:
        return t.const
    try:
        return t.const * coeffs[t.slot]
    except KeyError:
        raise KeyError(f"coefficient slot {t.slot!r} missing from assignment") from None


def evaluate(f: PolynomialTemplate, coeffs: CoefficientAssignment, point: Sequence[complex]) -> complex:
    total = 0.0 + 0.0j
    for t in f.terms:
        mono_val = 1.0 + 0.0j
        for x, e in zip(point, t.exps):
            if e:
                mono_val *= x**e
        total += term_value(t, coeffs) * mono_val
    return total


def normalized_residual(
    system: SystemTemplate, coeffs: CoefficientAssignment, point: Sequence[complex]
) -> float:
    """max_i |f_i(p)| / (sum_a |c_{i,a} p^a| + 1); zero iff every f_i vanishes."""
    worst = 0.0
    for f in system.polys:
        num = 0.0 + 0.0j
        den = 1.0
        for t in f.terms:
            mono_val = 1.0 + 0.0j
            for x, e in zip(point, t.exps):
                if e:
                    mono_val *= x**e
            contrib = term_value(t, coeffs) * mono_val
            num += contrib
            den += abs(contrib)
        worst = max(worst, abs(num) / den)
    return worst


@dataclass(frozen=True)
class Extension:
    """Result of extending a system over a monomial set B'.

    ``multipliers[i]`` is T_i, the multipliers t with mon(t*f_i) inside B';
    ``monomials`` is mon(F') for the extended set F' (a subset of B').
    """

    multipliers: tuple[frozenset[Mono], ...]
    monomials: frozenset[Mono]

    @property
    def products(self) -> list[tuple[int, Mono]]:
        out = []
        for i, ts in enumerate(self.multipliers):
            out.extend((i, t) for t in sorted(ts))
        return out


def extend_system(polys: Sequence[PolynomialTemplate], b_prime: Iterable[Mono]) -> Extension:
    """Largest monomial-multiple extension of each polynomial inside B'.

    Empty multiplier sets are a legal outcome, reported to the caller.
    """
    b_set = frozenset(b_prime)
    if not b_set:
        raise ValueError("B' must be nonempty")
    multipliers = []
    used: set[Mono] = set()
    for f in polys:
        supp = sorted(support(f))
        anchor = supp[0]
        t_i = set()
        for b in b_set:
            t = mono_div(b, anchor)
            if t is None:
                continue
            shifted = [mono_mul(t, a) for a in supp]
            if all(s in b_set for s in shifted):
                t_i.add(t)
                used.update(shifted)
        multipliers.append(frozenset(t_i))
    return Extension(tuple(multipliers), frozenset(used))
