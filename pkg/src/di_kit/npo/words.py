"""Noncommutative words over per-party generators.

Letters of different parties commute. Generators of an ``involution`` party
are Hermitian with square one. Generators of a ``free`` party obey no
relation; their adjoints are separate letters marked with ``dagger``.
"""
import re
from collections import namedtuple
from dataclasses import dataclass

Letter = namedtuple("Letter", "party index dagger", defaults=(False,))

IDENTITY = ()

INVOLUTION = "involution"
FREE = "free"


@dataclass(frozen=True)
class Party:
    name: str
    n_generators: int
    kind: str = INVOLUTION

    def letters(self):
        out = [Letter(self.name, i) for i in range(self.n_generators)]
        if self.kind == FREE:
            out += [Letter(self.name, i, True) for i in range(self.n_generators)]
        return out


@dataclass(frozen=True)
class Algebra:
    """Ordered collection of parties; the order fixes the canonical party-major layout."""

    parties: tuple

    def __post_init__(self):
        object.__setattr__(self, "parties", tuple(self.parties))
        names = [p.name for p in self.parties]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate party names in {names}")
        object.__setattr__(self, "_rank", {p.name: i for i, p in enumerate(self.parties)})
        object.__setattr__(self, "_kind", {p.name: p.kind for p in self.parties})

    def rank(self, party):
        try:
            return self._rank[party]
        except KeyError:
            raise ValueError(f"unknown party {party!r}") from None

    def is_involution(self, party):
        return self._kind[self._known(party)] == INVOLUTION

    def _known(self, party):
        self.rank(party)
        return party

    def letters(self):
        return [letter for p in self.parties for letter in p.letters()]

    def party(self, name):
        return self.parties[self.rank(name)]


def bipartite(n_a=2, n_b=2, names=("A", "B")):
    return Algebra((Party(names[0], n_a), Party(names[1], n_b)))


def canonicalize(word, algebra=None):
    """Party-major stable sort followed by cancellation of ``g g = 1`` for involutions.

    Without an algebra every party is an involution party and parties are
    ordered by name.
    """
    word = tuple(Letter(*l) for l in word)
    if algebra is None:
        ordered = sorted(word, key=lambda l: l.party)
        involutive = lambda party: True  # noqa: E731
    else:
        ordered = sorted(word, key=lambda l: algebra.rank(l.party))
        involutive = algebra.is_involution
    out = []
    for letter in ordered:
        if out and out[-1] == letter and not letter.dagger and involutive(letter.party):
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def adjoint(word, algebra=None):
    """Reverse the word and toggle daggers on letters of free parties."""
    out = []
    for l in reversed(tuple(word)):
        free = algebra is not None and not algebra.is_involution(l.party)
        out.append(Letter(l.party, l.index, not l.dagger) if free else Letter(l.party, l.index, l.dagger))
    return canonicalize(out, algebra)


def word_sort_key(word, algebra=None):
    rank = (lambda p: algebra.rank(p)) if algebra is not None else (lambda p: p)
    return (len(word), tuple((rank(l.party), l.index, l.dagger) for l in word))


def hermitian_key(word, algebra=None):
    """Representative of ``{w, w^+}``: the smaller of the two canonical words."""
    w = canonicalize(word, algebra)
    wd = adjoint(w, algebra)
    return min(w, wd, key=lambda x: word_sort_key(x, algebra))


def parse_word(text):
    """``"A0 B1"``, ``"A0*A1"`` style strings; ``"1"`` or ``""`` is the identity."""
    text = text.replace("*", "~").replace(" ", "")
    if text in ("", "1"):
        return IDENTITY
    out = []
    pos = 0
    for m in re.finditer(r"([A-Za-z]+)(\d+)(~?)", text):
        if m.start() != pos:
            raise ValueError(f"cannot parse word {text!r}")
        out.append(Letter(m.group(1), int(m.group(2)), bool(m.group(3))))
        pos = m.end()
    if pos != len(text):
        raise ValueError(f"cannot parse word {text!r}")
    return tuple(out)


def format_word(word):
    if not word:
        return "1"
    return " ".join(f"{l.party}{l.index}{'*' if l.dagger else ''}" for l in word)


# polynomials: dict word -> coefficient


def poly(*terms):
    """Build a polynomial from ``(coef, word)`` pairs; words may be strings."""
    out = {}
    for coef, w in terms:
        w = parse_word(w) if isinstance(w, str) else tuple(w)
        out[w] = out.get(w, 0) + coef
    return out


def poly_canon(p, algebra=None):
    out = {}
    for w, c in p.items():
        cw = canonicalize(w, algebra)
        out[cw] = out.get(cw, 0) + c
    return {w: c for w, c in out.items() if c != 0}


def poly_add(*ps):
    out = {}
    for p in ps:
        for w, c in p.items():
            out[w] = out.get(w, 0) + c
    return {w: c for w, c in out.items() if c != 0}


def poly_scale(p, s):
    return {w: c * s for w, c in p.items()}


def poly_mul(p, q, algebra=None):
    out = {}
    for w1, c1 in p.items():
        for w2, c2 in q.items():
            w = canonicalize(tuple(w1) + tuple(w2), algebra)
            out[w] = out.get(w, 0) + c1 * c2
    return {w: c for w, c in out.items() if c != 0}


def poly_adjoint(p, algebra=None):
    out = {}
    for w, c in p.items():
        wd = adjoint(w, algebra)
        out[wd] = out.get(wd, 0) + (c.conjugate() if isinstance(c, complex) else c)
    return out


def gen(party, index, dagger=False):
    return {(Letter(party, index, dagger),): 1.0}


def anticommutator_sq(a, b, algebra=None):
    """``{a, b}^2`` for generator letters ``a``, ``b`` (given as ``(party, index)``)."""
    ab = poly_add(poly_mul(gen(*a), gen(*b), algebra), poly_mul(gen(*b), gen(*a), algebra))
    return poly_mul(ab, ab, algebra)


def commutator_sq(a, b, algebra=None):
    """``[a, b]^+ [a, b]``."""
    c = poly_add(poly_mul(gen(*a), gen(*b), algebra), poly_scale(poly_mul(gen(*b), gen(*a), algebra), -1.0))
    return poly_mul(poly_adjoint(c, algebra), c, algebra)


def chsh_operator(alice="A", bob="B"):
    """``A0 B0 + A0 B1 + A1 B0 - A1 B1``."""
    return poly(
        (1.0, f"{alice}0{bob}0"),
        (1.0, f"{alice}0{bob}1"),
        (1.0, f"{alice}1{bob}0"),
        (-1.0, f"{alice}1{bob}1"),
    )
