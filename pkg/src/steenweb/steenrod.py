"""Exact arithmetic in the mod-p algebra of Steenrod operations.

Elements are Z_p-linear combinations of composition monomials
Sq^{i_1}...Sq^{i_s} (p = 2) or P^{i_1}...P^{i_s} (p odd, no Bockstein).
`adem_reduce` rewrites any homogeneous element to its canonical form,
a combination of admissible monomials, by repeatedly replacing the
leftmost inadmissible adjacent pair.

Termination: one rewrite replaces (a, b) at positions (m, m+1) by pairs
(a+b-j, j) with j < b, so the moment sum(position * exponent) strictly
drops within a fixed degree; single-factor outputs shorten the word and
drop it further.  Rewrites are memoized per (p, exponent pair) and full
monomial reductions per (p, monomial); both caches are append-only dicts,
safe under concurrent readers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from math import comb


class SteenrodError(Exception):
    """Base for domain errors in this module."""


class InvalidM(SteenrodError):
    """m outside [1, lambda] in a hit decomposition request."""


class BaseCaseSignal(SteenrodError):
    """Leading-coefficient request on a base-case decomposition."""


@lru_cache(maxsize=None)
def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class Prime:
    """A verified prime; p = 2 selects squares, odd p selects powers."""

    p: int

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    @property
    def odd(self) -> bool:
        return self.p != 2

    def op_name(self) -> str:
        return "P" if self.odd else "Sq"


def binom_mod_p(x: int, y: int, p: Prime | int) -> int:
    """Binomial coefficient C(x, y) mod p by the base-p digit product.

    Zero as soon as some digit of y exceeds the matching digit of x.
    """
    q = p.p if isinstance(p, Prime) else int(p)
    if y < 0 or y > x:
        return 0
    out = 1
    while y > 0 or x > 0:
        xd, yd = x % q, y % q
        if yd > xd:
            return 0
        out = (out * comb(xd, yd)) % q
        x //= q
        y //= q
    return out


# ---------------------------------------------------------------------------
# monomials
# ---------------------------------------------------------------------------


class OpMonomial:
    """A composition of operations, stored as the exponent sequence."""

    __slots__ = ("prime", "exponents")

    def __init__(self, prime: Prime, exponents):
        exponents = tuple(int(i) for i in exponents)
        if any(i < 1 for i in exponents):
            raise ValueError("exponents must be >= 1 (identity = empty sequence)")
        object.__setattr__(self, "prime", prime)
        object.__setattr__(self, "exponents", exponents)

    def __setattr__(self, *_):
        raise AttributeError("OpMonomial is immutable")

    @property
    def degree(self) -> int:
        return monomial_degree(self.prime, self.exponents)

    @property
    def admissible(self) -> bool:
        return is_admissible(self.prime, self.exponents)

    def __eq__(self, other):
        return (
            isinstance(other, OpMonomial)
            and self.prime == other.prime
            and self.exponents == other.exponents
        )

    def __hash__(self):
        return hash((self.prime.p, self.exponents))

    def __repr__(self):
        return f"OpMonomial(p={self.prime.p}, {self.exponents})"


def monomial_degree(prime: Prime, exponents) -> int:
    s = sum(exponents)
    return s if prime.p == 2 else 2 * (prime.p - 1) * s


def is_admissible(prime: Prime, exponents) -> bool:
    q = 2 if prime.p == 2 else prime.p
    return all(exponents[i] >= q * exponents[i + 1] for i in range(len(exponents) - 1))


# ---------------------------------------------------------------------------
# elements
# ---------------------------------------------------------------------------


class SteenrodElement:
    """Homogeneous Z_p combination of composition monomials.

    `terms` maps exponent tuples to nonzero coefficients in [1, p-1].
    """

    __slots__ = ("prime", "terms", "_degree")

    def __init__(self, prime: Prime, terms):
        p = prime.p
        clean = {}
        deg = None
        for mon, c in terms.items():
            mon = tuple(int(i) for i in mon)
            if any(i < 1 for i in mon):
                raise ValueError("exponents must be >= 1")
            c = int(c) % p
            if c == 0:
                continue
            d = monomial_degree(prime, mon)
            if deg is None:
                deg = d
            elif d != deg:
                raise ValueError("element is not homogeneous")
            clean[mon] = (clean.get(mon, 0) + c) % p
        clean = {m: c for m, c in clean.items() if c}
        object.__setattr__(self, "prime", prime)
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "_degree", deg)

    def __setattr__(self, *_):
        raise AttributeError("SteenrodElement is immutable")

    @classmethod
    def zero(cls, prime: Prime) -> "SteenrodElement":
        return cls(prime, {})

    @classmethod
    def monomial(cls, prime: Prime, exponents, coeff: int = 1) -> "SteenrodElement":
        return cls(prime, {tuple(exponents): coeff})

    @classmethod
    def identity(cls, prime: Prime) -> "SteenrodElement":
        return cls(prime, {(): 1})

    @property
    def degree(self):
        """Common degree of the terms, or None for the zero element."""
        return self._degree

    def is_zero(self) -> bool:
        return not self.terms

    def is_admissible(self) -> bool:
        return all(is_admissible(self.prime, m) for m in self.terms)

    def __add__(self, other: "SteenrodElement") -> "SteenrodElement":
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return SteenrodElement(self.prime, out)

    def __sub__(self, other: "SteenrodElement") -> "SteenrodElement":
        return self + other.scale(-1)

    def scale(self, a: int) -> "SteenrodElement":
        return SteenrodElement(self.prime, {m: c * a for m, c in self.terms.items()})

    def compose(self, other: "SteenrodElement") -> "SteenrodElement":
        """Concatenation product (self applied after other), unreduced."""
        self._check(other)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = m1 + m2
                out[m] = out.get(m, 0) + c1 * c2
        return SteenrodElement(self.prime, out)

    def _check(self, other):
        if self.prime != other.prime:
            raise ValueError("mixed primes")

    def __eq__(self, other):
        return (
            isinstance(other, SteenrodElement)
            and self.prime == other.prime
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.prime.p, frozenset(self.terms.items())))

    def __repr__(self):
        return f"SteenrodElement(p={self.prime.p}, {format_element(self)!r})"


# ---------------------------------------------------------------------------
# Adem rewriting
# ---------------------------------------------------------------------------

_adem_pair_cache: dict = {}


def adem_pair(p: int, a: int, b: int):
    """Rewrite of the inadmissible pair (a, b) as ((coeff, replacement), ...).

    p = 2:  Sq^a Sq^b -> sum_j C(b-1-j, a-2j) Sq^{a+b-j} Sq^j,  a < 2b.
    p odd:  P^a P^b  -> sum_j (-1)^{a+j} C((p-1)(b-j)-1, a-pj) P^{a+b-j} P^j,
            a < pb.
    Replacements drop the j = 0 factor (P^0 = identity).
    """
    key = (p, a, b)
    hit = _adem_pair_cache.get(key)
    if hit is not None:
        return hit
    out = []
    if p == 2:
        assert a < 2 * b
        for j in range(a // 2 + 1):
            c = binom_mod_p(b - 1 - j, a - 2 * j, 2)
            if c:
                out.append((1, (a + b,) if j == 0 else (a + b - j, j)))
    else:
        assert a < p * b
        for j in range(a // p + 1):
            c = binom_mod_p((p - 1) * (b - j) - 1, a - p * j, p)
            if c:
                c = (c * (-1) ** (a + j)) % p
                out.append((c, (a + b,) if j == 0 else (a + b - j, j)))
    out = tuple(out)
    _adem_pair_cache[key] = out
    return out


_reduce_cache: dict = {}


def _first_inadmissible(p: int, mon: tuple) -> int:
    q = 2 if p == 2 else p
    for i in range(len(mon) - 1):
        if mon[i] < q * mon[i + 1]:
            return i
    return -1


def _reduce_monomial(p: int, mon: tuple) -> dict:
    """Canonical form of one monomial: {admissible tuple: coeff mod p}.

    Iterative DFS (rewrite chains can exceed the interpreter stack).
    """
    cache = _reduce_cache
    stack = [mon]
    while stack:
        cur = stack[-1]
        if (p, cur) in cache:
            stack.pop()
            continue
        pos = _first_inadmissible(p, cur)
        if pos < 0:
            cache[(p, cur)] = {cur: 1}
            stack.pop()
            continue
        rewrites = adem_pair(p, cur[pos], cur[pos + 1])
        deps = [cur[:pos] + rep + cur[pos + 2 :] for _, rep in rewrites]
        missing = [d for d in deps if (p, d) not in cache]
        if missing:
            stack.extend(missing)
            continue
        acc: dict = {}
        for (coeff, _), dep in zip(rewrites, deps):
            for m2, c2 in cache[(p, dep)].items():
                v = (acc.get(m2, 0) + coeff * c2) % p
                if v:
                    acc[m2] = v
                else:
                    acc.pop(m2, None)
        cache[(p, cur)] = acc
        stack.pop()
    return cache[(p, mon)]


def adem_reduce(e: SteenrodElement) -> SteenrodElement:
    """Canonical admissible form of a homogeneous element.

    Idempotent, linear, degree-preserving.
    """
    p = e.prime.p
    out: dict = {}
    for mon, c in e.terms.items():
        for m2, c2 in _reduce_monomial(p, mon).items():
            out[m2] = out.get(m2, 0) + c * c2
    return SteenrodElement(e.prime, out)


def admissible_monomials(prime: Prime, degree: int):
    """All admissible exponent tuples of the given degree (basis of a slice)."""
    p = prime.p
    if p == 2:
        total = degree
    else:
        unit = 2 * (p - 1)
        if degree % unit:
            return []
        total = degree // unit
    q = 2 if p == 2 else p

    def rec(first_max, rest):
        if rest == 0:
            return [()]
        out = []
        for i in range(1, min(first_max, rest) + 1):
            for tail in rec(i // q, rest - i):
                out.append((i,) + tail)
        return out

    return rec(total, total)


# ---------------------------------------------------------------------------
# the two constructive decompositions
# ---------------------------------------------------------------------------


def sq_power_of_two_decomposition(l: int):
    """Express Sq^l through lower squares, or report that l is a 2-power.

    For l not a power of two, write l = 2^c + d with d = 0 mod 2^{c+1}
    (c = the lowest set bit) and expand Sq^{2^c} Sq^d.  Returns
    ("power-of-two", None) or ("decomposition", [(i, a_i), ...]) with
    adem_reduce(sum a_i Sq^i Sq^{l-i}) = Sq^l.
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    if l & (l - 1) == 0:
        return ("power-of-two", None)
    c = (l & -l).bit_length() - 1
    d = l - (1 << c)
    assert d % (1 << (c + 1)) == 0 and d > 0
    pairs = [(1 << c, 1)]
    saw_target = False
    for coeff, rep in adem_pair(2, 1 << c, d):
        if rep == (l,):
            saw_target = True  # the Sq^l term itself, moved to the left-hand side
            continue
        hi, lo = rep
        assert hi + lo == l and 0 < lo
        pairs.append((hi, coeff))
    assert saw_target, f"rewrite of Sq^{1 << c} Sq^{d} lost its Sq^{l} term"
    pairs.sort()
    return ("decomposition", pairs)


def sq_relation_element(l: int, pairs) -> SteenrodElement:
    """The element sum a_i Sq^i Sq^{l-i} for a decomposition of Sq^l."""
    two = Prime(2)
    out: dict = {}
    for i, a in pairs:
        out[(i, l - i)] = out.get((i, l - i), 0) + a
    return SteenrodElement(two, out)


def _split_k(p: int, k: int):
    """k = lam * p^a + mu with 0 < lam < p and mu = 0 mod p^{a+1}."""
    a = 0
    t = k
    while t % p == 0:
        t //= p
        a += 1
    lam = t % p
    mu = k - lam * p**a
    return lam, a, mu


@dataclass(frozen=True)
class HitDecomposition:
    """P^k = P^{m p^a} Q_a + sum_{i<a} P^{p^i} Q_i, all in admissible form."""

    prime: Prime
    k: int
    lam: int
    a: int
    mu: int
    m: int
    leading: SteenrodElement
    lower: dict  # exponent p^i (i < a) -> SteenrodElement

    def assembled(self) -> SteenrodElement:
        """adem_reduce of the right-hand side; equals P^k when valid."""
        pr = self.prime
        total = SteenrodElement.monomial(pr, (self.m * pr.p**self.a,)).compose(
            self.leading
        )
        for e, q in self.lower.items():
            total = total + SteenrodElement.monomial(pr, (e,)).compose(q)
        return adem_reduce(total)

    def verify(self) -> bool:
        return self.assembled() == SteenrodElement.monomial(self.prime, (self.k,))


def leading_coefficient_check(prime: Prime, k: int, m: int) -> int:
    """The unit c_0 scaling P^k in the expansion of P^{m p^a} P^{k - m p^a}.

    Computed two ways -- as the j = 0 coefficient of the rewrite and by the
    closed form (-1)^m C(p - (lam - m) - 1, m) -- which must agree and be
    nonzero.  Raises BaseCaseSignal when mu = 0 and m = lam.
    """
    p = prime.p
    if not prime.odd:
        raise ValueError("odd primes only")
    lam, a, mu = _split_k(p, k)
    if not 1 <= m <= lam:
        raise InvalidM(f"m={m} outside [1, {lam}] for k={k}, p={p}")
    if mu == 0 and m == lam:
        raise BaseCaseSignal(f"P^{k} = P^{{{m}p^{a}}} is already decomposed")
    ap, bp = m * p**a, k - m * p**a
    direct = ((-1) ** ap * binom_mod_p((p - 1) * bp - 1, ap, p)) % p
    closed = ((-1) ** m * binom_mod_p(p - (lam - m) - 1, m, p)) % p
    if direct != closed:
        raise SteenrodError(
            f"leading coefficient mismatch for p={p}, k={k}, m={m}: "
            f"{direct} != {closed}"
        )
    if direct == 0:
        raise SteenrodError(f"leading coefficient vanished for p={p}, k={k}, m={m}")
    return direct


_hit_cache: dict = {}


def hit_decompose(prime: Prime, k: int, m: int) -> HitDecomposition:
    """Constructive decomposition of P^k with leading factor P^{m p^a}.

    Base case: mu = 0, m = lam gives P^k = P^{m p^a} directly.  Otherwise
    the rewrite of P^{m p^a} P^{k - m p^a} is divided by its unit leading
    coefficient and every correction P^{k-j} P^j is decomposed recursively
    (with m' = 1, so its leading exponents are the p^i, i < a).
    """
    p = prime.p
    if not prime.odd:
        raise ValueError("odd primes only")
    if k < 1:
        raise ValueError("k must be >= 1")
    key = (p, k, m)
    hit = _hit_cache.get(key)
    if hit is not None:
        return hit
    lam, a, mu = _split_k(p, k)
    if not 1 <= m <= lam:
        raise InvalidM(f"m={m} outside [1, {lam}] for k={k}, p={p}")
    if mu == 0 and m == lam:
        out = HitDecomposition(
            prime, k, lam, a, mu, m, SteenrodElement.identity(prime), {}
        )
        _hit_cache[key] = out
        return out

    ap, bp = m * p**a, k - m * p**a
    assert ap < p * bp
    c0 = leading_coefficient_check(prime, k, m)
    inv = pow(c0, p - 2, p)
    leading = adem_reduce(SteenrodElement.monomial(prime, (bp,), inv))
    lower: dict = {}
    for coeff, rep in adem_pair(p, ap, bp):
        if rep == (k,):
            continue
        kj, j = rep
        sub = hit_decompose(prime, kj, 1)
        scale = (-inv * coeff) % p
        pj = SteenrodElement.monomial(prime, (j,))
        # leading factor of the sub-decomposition is P^{p^{a_sub}}
        piece = {p ** sub.a: sub.leading}
        piece.update(sub.lower)
        for e, q in piece.items():
            assert e < p**a
            contrib = adem_reduce(q.compose(pj)).scale(scale)
            lower[e] = lower[e] + contrib if e in lower else contrib
    lower = {e: q for e, q in lower.items() if not q.is_zero()}
    out = HitDecomposition(prime, k, lam, a, mu, m, leading, lower)
    _hit_cache[key] = out
    return out


# ---------------------------------------------------------------------------
# text grammar:  term := COEFF? OP ('.' OP)* ; OP := ('Sq'|'P') INT ;
#                element := term ('+' term)*
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|(Sq|P)(\d+)|([.+]))")


class ParseError(ValueError):
    def __init__(self, message, pos):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


def parse_element(text: str, prime: Prime) -> SteenrodElement:
    """Parse the element grammar, e.g. "Sq5 . Sq3 + Sq7 . Sq1" or "2 P2"."""
    opname = prime.op_name()
    terms: dict = {}
    pos = 0
    n = len(text)

    def next_token():
        nonlocal pos
        m = _TOKEN.match(text, pos)
        if not m or m.start() != pos:
            raise ParseError("unexpected character", pos)
        pos = m.end()
        return m

    while True:
        coeff = 1
        ops = []
        m = next_token()
        if m.group(1):
            coeff = int(m.group(1))
            m = next_token()
        while True:
            if not m.group(2):
                raise ParseError(f"expected {opname}<int>", m.start())
            if m.group(2) != opname:
                raise ParseError(
                    f"operation {m.group(2)} not valid at p={prime.p}", m.start()
                )
            exp = int(m.group(3))
            if exp > 0:  # Sq0 / P0 is the identity factor
                ops.append(exp)
            if pos >= n or text[pos:].strip() == "":
                mon = tuple(ops)
                terms[mon] = terms.get(mon, 0) + coeff
                return SteenrodElement(prime, terms)
            m = next_token()
            if m.group(4) == ".":
                m = next_token()
                continue
            if m.group(4) == "+":
                break
            raise ParseError("expected '.', '+' or end", m.start())
        mon = tuple(ops)
        terms[mon] = terms.get(mon, 0) + coeff


def format_element(e: SteenrodElement) -> str:
    """Render an element in the text grammar; canonical ordering."""
    if e.is_zero():
        return "0"
    opname = e.prime.op_name()
    parts = []
    for mon in sorted(e.terms, key=lambda m: (len(m), m)):
        c = e.terms[mon]
        ops = " . ".join(f"{opname}{i}" for i in mon) if mon else f"{opname}0"
        parts.append(ops if c == 1 else f"{c} {ops}")
    return " + ".join(parts)
