"""Certified bounds on anticommutator and commutator moments from Bell statistics."""
from ..bell import StatisticsTable, chsh_value
from ..errors import ShapeError
from .moments import anticommuting_rule, build_moment_problem, perfect_correlation_rules
from .sdp import MAX_ITERATIONS, solve_sdp
from .words import Algebra, Party, anticommutator_sq, chsh_operator, commutator_sq

DEFAULT_LEVEL = 2
ZERO_CAP = 1e-12


def kernel_rules(stats, caps=None):
    """Substitution rules implied exactly by the data (see ``build_moment_problem``)."""
    rules = perfect_correlation_rules(stats)
    for side, value in sorted((caps or {}).items()):
        if value <= ZERO_CAP:
            rules.append(anticommuting_rule(side))
    return rules


def stats_constraints(table, alice="A", bob="B", full=True):
    """Moment equalities encoding a binary-outcome table (or only its CHSH value)."""
    if table.inputs != (2, 2) or table.outputs != (2, 2):
        raise ShapeError(f"2-input/2-output table required, got {table.probs.shape}")
    if not full:
        return [(chsh_operator(alice, bob), chsh_value(table))]
    out = []
    for x in range(2):
        out.append((f"{alice}{x}", table.alice_mean(x)))
    for y in range(2):
        out.append((f"{bob}{y}", table.bob_mean(y)))
    for x in range(2):
        for y in range(2):
            out.append((f"{alice}{x}{bob}{y}", table.correlator(x, y)))
    return out


def _local_algebra(alice, tester):
    return Algebra((Party(alice, 2), Party(tester, 2)))


def bound_anticom_sq(local_stats, level=DEFAULT_LEVEL, use_full_stats=True, alice="A", tester="F",
                     max_iter=MAX_ITERATIONS):
    """Certified maximum of ``<{A0, A1}^2>`` over models reproducing ``local_stats``.

    Returns ``(s_max, solution)``; ``s_max`` is clamped to the algebraic
    range ``[0, 4]``.
    """
    stats = stats_constraints(local_stats, alice, tester, use_full_stats)
    problem = build_moment_problem(
        _local_algebra(alice, tester),
        level,
        stats=stats,
        objective=anticommutator_sq((alice, 0), (alice, 1)),
        sense="max",
        kernel_rules=kernel_rules(stats),
    )
    sol = solve_sdp(problem, max_iter=max_iter)
    return min(4.0, max(0.0, sol.certified)), sol


def bound_com_sq(local_stats, level=DEFAULT_LEVEL, use_full_stats=True, alice="A", tester="F"):
    """Certified minimum of ``<[A0, A1]^+ [A0, A1]>``; returns ``(s_min, solution)``."""
    stats = stats_constraints(local_stats, alice, tester, use_full_stats)
    problem = build_moment_problem(
        _local_algebra(alice, tester),
        level,
        stats=stats,
        objective=commutator_sq((alice, 0), (alice, 1)),
        sense="min",
        kernel_rules=kernel_rules(stats),
    )
    sol = solve_sdp(problem)
    return min(4.0, max(0.0, sol.certified)), sol


def bb84_constraints(table, alice="A", bob="B"):
    """Long-range statistics for ``(Z, X)`` on both sides, input 0 being ``Z``."""
    return stats_constraints(table, alice, bob, full=True)


def long_range_anticom_bound(long_range_stats, caps, level=DEFAULT_LEVEL):
    """Certified maximum of Alice's ``<{A_Z, A_X}^2>`` on the long-range state.

    ``caps`` maps ``"A"`` and/or ``"B"`` to transferred upper bounds on the
    corresponding party's anticommutator square.
    """
    if not isinstance(long_range_stats, StatisticsTable):
        raise TypeError("long_range_stats must be a StatisticsTable")
    algebra = Algebra((Party("A", 2), Party("B", 2)))
    cap_terms = [(anticommutator_sq((side, 0), (side, 1)), value) for side, value in sorted(caps.items())]
    stats = bb84_constraints(long_range_stats)
    problem = build_moment_problem(
        algebra,
        level,
        stats=stats,
        objective=anticommutator_sq(("A", 0), ("A", 1)),
        sense="max",
        caps=cap_terms,
        kernel_rules=kernel_rules(stats, caps),
    )
    sol = solve_sdp(problem)
    return min(4.0, max(0.0, sol.certified)), sol
