"""Moment-matrix relaxations.

Entry ``(u, v)`` of the moment matrix is the moment of ``u^+ v``. Moments
are taken real: when every constraint and the objective have real
coefficients on Hermitian combinations, the entrywise complex conjugate of a
feasible moment matrix is again feasible with the same value, and the
average of the two is real. Consequently ``w`` and ``w^+`` share one
variable.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import LevelTooLowError
from .words import (
    IDENTITY,
    Algebra,
    Party,
    adjoint,
    canonicalize,
    format_word,
    hermitian_key,
    parse_word,
    poly_canon,
    word_sort_key,
)


def as_algebra(parties):
    """Accept an :class:`Algebra`, a ``{name: n_generators}`` map or a list of :class:`Party`."""
    if isinstance(parties, Algebra):
        return parties
    if isinstance(parties, dict):
        return Algebra(tuple(Party(name, n) for name, n in parties.items()))
    return Algebra(tuple(parties))


def words_up_to(algebra, level):
    """All distinct canonical words of length at most ``level``, shortest first."""
    seen = {IDENTITY}
    frontier = [IDENTITY]
    letters = algebra.letters()
    for _ in range(level):
        nxt = []
        for w in frontier:
            for l in letters:
                cw = canonicalize(w + (l,), algebra)
                if cw not in seen:
                    seen.add(cw)
                    nxt.append(cw)
        frontier = nxt
    return sorted(seen, key=lambda w: word_sort_key(w, algebra))


def cross_term_words(algebra):
    """Identity, single generators and one-generator-per-party products of two parties."""
    out = [IDENTITY] + [(l,) for l in algebra.letters()]
    parties = algebra.parties
    for i, p in enumerate(parties):
        for q in parties[i + 1:]:
            out += [(a, b) for a in p.letters() for b in q.letters()]
    return out


@dataclass
class MomentProblem:
    algebra: Algebra
    level: int
    index_words: list
    keys: list
    grid: np.ndarray
    eq_constraints: list
    caps: list
    objective: dict
    sense: str = "max"
    var_bounds: np.ndarray = None
    var_of: dict = field(default_factory=dict, repr=False)
    aliases: dict = field(default_factory=dict, repr=False)

    @property
    def bounded_moments(self):
        """True when every moment is a product of involutions (so ``|y_k| <= 1``)."""
        return bool(np.all(self.var_bounds <= 1.0))

    @property
    def n_vars(self):
        return len(self.keys)

    @property
    def block_size(self):
        return len(self.index_words)

    def var(self, word):
        """``(variable, sign)`` carrying the moment of ``word``."""
        key = hermitian_key(word, self.algebra)
        if key in self.var_of:
            return self.var_of[key], 1.0
        if key in self.aliases:
            return self.aliases[key]
        raise LevelTooLowError(f"moment of {format_word(key)} is not housed at level {self.level}")

    def linear(self, polynomial):
        """Map a polynomial to ``{variable: real coefficient}``."""
        out = {}
        for w, c in poly_canon(polynomial, self.algebra).items():
            k, sgn = self.var(w)
            out[k] = out.get(k, 0) + sgn * c
        clean = {}
        for k, c in out.items():
            c = complex(c)
            if abs(c.imag) > 1e-12:
                raise ValueError("polynomial is not Hermitian: imaginary moment coefficient")
            if c.real != 0:
                clean[k] = c.real
        return clean

    def moment_matrix(self, y):
        return np.asarray(y, dtype=float)[self.grid]

    def evaluate(self, lin, y):
        return float(sum(c * y[k] for k, c in lin.items()))

    def to_dict(self):
        fmt = format_word
        return {
            "level": self.level,
            "sense": self.sense,
            "parties": [[p.name, p.n_generators, p.kind] for p in self.algebra.parties],
            "index_words": [fmt(w) for w in self.index_words],
            "variables": [fmt(w) for w in self.keys],
            "grid": self.grid.tolist(),
            "eq_constraints": [[{str(k): c for k, c in lin.items()}, t] for lin, t in self.eq_constraints],
            "caps": [[{str(k): c for k, c in lin.items()}, t] for lin, t in self.caps],
            "objective": {str(k): c for k, c in self.objective.items()},
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def _var_bounds(keys, algebra, letter_norms):
    out = np.ones(len(keys))
    for k, w in enumerate(keys):
        for l in w:
            if not algebra.is_involution(l.party):
                out[k] *= letter_norms.get(l.party, np.inf)
    return out


def perfect_correlation_rules(stats, tol=1e-12):
    """Rules implied by stats of modulus one on involution generators.

    ``<g> = s`` gives ``g psi = s psi`` and ``<g h> = s`` (different parties)
    gives ``g psi = s h psi``.
    """
    rules = []
    for target, value in _normalize_terms(stats):
        if len(target) != 1 or abs(abs(value) - 1.0) > tol:
            continue
        (w, c), = target.items()
        sign = 1.0 if value > 0 else -1.0
        if c != 1.0 or any(l.dagger for l in w):
            continue
        if len(w) == 1:
            rules.append(((w[0],), IDENTITY, sign))
        elif len(w) == 2 and w[0].party != w[1].party:
            rules.append(((w[0],), (w[1],), sign))
    return rules


def anticommuting_rule(party, i=0, j=1):
    """Rule ``g_i g_j psi = - g_j g_i psi``, implied by ``<{g_i, g_j}^2> = 0``."""
    from .words import Letter

    return ((Letter(party, i), Letter(party, j)), (Letter(party, j), Letter(party, i)), -1.0)


def _apply_rule(word, rule, algebra):
    lhs, rhs, sign = rule
    party = lhs[0].party
    block = [l for l in word if l.party == party]
    if len(block) < len(lhs) or tuple(block[len(block) - len(lhs):]) != tuple(lhs):
        return None
    # drop the trailing lhs from its party block, append rhs at the far right
    out = list(word)
    last = max(i for i, l in enumerate(out) if l.party == party)
    del out[last - len(lhs) + 1: last + 1]
    return canonicalize(tuple(out) + tuple(rhs), algebra), sign


def _reduce_index(words, rules, algebra):
    """Union-find over index words identified (up to sign) by the rules."""
    index = {w: i for i, w in enumerate(words)}
    parent = list(range(len(words)))
    parity = [1.0] * len(words)

    def find(i):
        s = 1.0
        while parent[i] != i:
            s *= parity[i]
            i = parent[i]
        return i, s

    for i, w in enumerate(words):
        for rule in rules:
            hit = _apply_rule(w, rule, algebra)
            if hit is None or hit[0] not in index:
                continue
            j = index[hit[0]]
            ri, si = find(i)
            rj, sj = find(j)
            if ri == rj:
                continue
            # w = s_w * rep; keep the earlier representative
            lo, hi = sorted((ri, rj))
            parent[hi] = lo
            parity[hi] = si * sj * hit[1]
    return [find(i) for i in range(len(words))]


def _normalize_terms(items):
    out = []
    for target, value in items:
        if isinstance(target, str):
            target = {parse_word(target): 1.0}
        elif isinstance(target, tuple):
            target = {target: 1.0}
        out.append((target, float(value)))
    return out


def build_moment_problem(
    parties,
    level,
    stats=(),
    objective=None,
    sense="max",
    caps=(),
    extra_words=(),
    cross_terms=False,
    index_words=None,
    letter_norms=None,
    kernel_rules=(),
):
    """Assemble the moment relaxation.

    ``stats`` and ``caps`` are lists of ``(word or polynomial, value)``.
    A stat fixes the moment to ``value``; a cap requires the polynomial's
    moment to be at most ``value`` (enforced as a 1x1 PSD block).
    ``cross_terms`` replaces the index set with the identity, the generators
    and the two-party products of generators. ``letter_norms`` maps free
    parties to an a-priori operator-norm bound on their generators; it only
    enters the rigour shift of the solver. ``kernel_rules`` lists relations
    ``(L, R, s)`` meaning ``L psi = s R psi`` for every admissible model;
    index words they identify are dropped and tied to their representative
    by equalities, which removes the flat directions of degenerate data.
    """
    algebra = as_algebra(parties)
    if level < 1:
        raise LevelTooLowError(f"level must be at least 1, got {level}")
    if sense not in ("max", "min"):
        raise ValueError(f"sense must be 'max' or 'min', got {sense!r}")
    if index_words is None:
        index_words = cross_term_words(algebra) if cross_terms else words_up_to(algebra, level)
    words = []
    seen = set()
    for w in list(index_words) + [canonicalize(parse_word(x) if isinstance(x, str) else x, algebra) for x in extra_words]:
        w = canonicalize(w, algebra)
        if w not in seen:
            seen.add(w)
            words.append(w)
    full = words
    reps = _reduce_index(full, list(kernel_rules), algebra) if kernel_rules else None
    if reps is not None:
        words = [w for i, w in enumerate(full) if reps[i][0] == i]
    n = len(words)
    var_of = {IDENTITY: 0}
    keys = [IDENTITY]

    def var_for(u, v, create=True):
        key = hermitian_key(adjoint(u, algebra) + v, algebra)
        k = var_of.get(key)
        if k is None and create:
            k = var_of[key] = len(keys)
            keys.append(key)
        return k

    grid = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i, n):
            grid[i, j] = grid[j, i] = var_for(words[i], words[j])
    ties = []
    aliases = {}
    if reps is not None:
        # every entry of the full matrix must equal (up to sign) its image in
        # the reduced one; the first image of a moment defines it, later
        # images are tied to the first
        pos = {w: i for i, w in enumerate(words)}
        for i, (ri, si) in enumerate(reps):
            for j, (rj, sj) in enumerate(reps):
                key = hermitian_key(adjoint(full[i], algebra) + full[j], algebra)
                image = (int(grid[pos[full[ri]], pos[full[rj]]]), si * sj)
                first = (var_of[key], 1.0) if key in var_of else aliases.setdefault(key, image)
                (a, sa), (b, sb) = first, image
                if a != b:
                    ties.append(({a: sa, b: -sb}, 0.0))
                elif sa != sb:
                    ties.append(({a: 1.0}, 0.0))
    problem = MomentProblem(
        algebra=algebra,
        level=level,
        index_words=words,
        keys=keys,
        grid=grid,
        eq_constraints=[],
        caps=[],
        objective={},
        sense=sense,
        var_bounds=_var_bounds(keys, algebra, letter_norms or {}),
        var_of=var_of,
        aliases=aliases,
    )
    problem.eq_constraints.append(({0: 1.0}, 1.0))
    problem.eq_constraints.extend(ties)
    for poly, value in _normalize_terms(stats):
        problem.eq_constraints.append((problem.linear(poly), value))
    for poly, value in _normalize_terms(caps):
        problem.caps.append((problem.linear(poly), value))
    if objective:
        problem.objective = problem.linear(objective)
    return problem
