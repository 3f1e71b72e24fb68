"""Scenario runner: local tests, transferred caps, long-range rates per QBER point.

Honest statistics come from Werner states: the local CHSH tests use
visibility ``local_visibility_A`` / ``local_visibility_B`` and the long-range
BB84 statistics at error rate ``q`` use visibility ``1 - 2q``.

Caps certified on a local test bound an operator of Alice (or Bob) alone.
Because the local and long-range rounds share the same marginal state and
the same measurement operators on that side, the caps hold verbatim on the
long-range state. With several local tests per side the smallest cap wins.
"""
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .bell import chsh_epsilon, chsh_winning_prob, werner_bb84_table, werner_chsh_table
from .bounds import SelfTestParams, eur_rate, overlap_from_moment_bound, thm1_rate
from .errors import ConfigError, DiKitError
from .npo.entropy_tier import bff_entropy_bound, entropy_tier_enabled
from .npo.selftest import bound_anticom_sq, long_range_anticom_bound

TIERS = ("analytic", "npo-eur", "npo-entropy")
SWITCHES = ("one", "two")
REPORT_FLOOR = -2.0
FIG_GRID = tuple(k * 0.028 / 13 for k in range(14))
CSV_HEADER = "qber,rate_no_switch,rate_one_switch,rate_two_switch,tier,status"


@dataclass
class ScenarioConfig:
    local_visibility_A: object = 0.99
    local_visibility_B: object = 0.99
    shared_visibility: object = None
    qber_grid: object = None
    switches: str = "two"
    local_tests_per_side: int = 1
    npa_level: int = 2
    tier: str = "npo-eur"
    delta_constant: float = 1.0
    m_nodes: int = 4
    routing_note: str = ""
    enable_entropy_tier: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        n = self.local_tests_per_side
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ConfigError("local_tests_per_side", "must be an integer >= 1")
        for name in ("local_visibility_A", "local_visibility_B"):
            vis = self._visibilities(name)
            if len(vis) not in (1, n):
                raise ConfigError(name, f"give one visibility or one per local test ({n})")
        if self.shared_visibility is not None and self.qber_grid is not None:
            raise ConfigError("shared_visibility", "give either shared_visibility or qber_grid, not both")
        if self.shared_visibility is not None:
            for v in np.atleast_1d(self.shared_visibility):
                if not _is_real(v) or not 0.0 <= v <= 1.0:
                    raise ConfigError("shared_visibility", f"visibility {v!r} outside [0, 1]")
        grid = self.grid()
        if not grid:
            raise ConfigError("qber_grid", "qber_grid must be non-empty")
        for q in grid:
            if not 0.0 <= q <= 0.5:
                raise ConfigError("qber_grid", f"QBER {q!r} outside [0, 1/2]")
        if self.switches not in SWITCHES:
            raise ConfigError("switches", f"must be one of {SWITCHES}, got {self.switches!r}")
        if self.tier not in TIERS:
            raise ConfigError("tier", f"must be one of {TIERS}, got {self.tier!r}")
        if not isinstance(self.npa_level, int) or isinstance(self.npa_level, bool) or self.npa_level < 2:
            raise ConfigError("npa_level", "must be an integer >= 2 (the objective has degree 4)")
        if not _is_real(self.delta_constant) or not self.delta_constant > 0:
            raise ConfigError("delta_constant", "must be a positive number")
        if not isinstance(self.m_nodes, int) or not 2 <= self.m_nodes <= 8:
            raise ConfigError("m_nodes", "must be an integer in 2..8")
        if not isinstance(self.routing_note, str):
            raise ConfigError("routing_note", "must be a string")
        if not isinstance(self.enable_entropy_tier, bool):
            raise ConfigError("enable_entropy_tier", "must be true or false")

    def _visibilities(self, name):
        raw = getattr(self, name)
        vis = list(raw) if isinstance(raw, (list, tuple)) else [raw]
        for v in vis:
            if not _is_real(v) or not 0.0 <= v <= 1.0:
                raise ConfigError(name, f"visibility {v!r} outside [0, 1]")
        return [float(v) for v in vis]

    def visibilities(self, side):
        vis = self._visibilities(f"local_visibility_{side}")
        return vis * self.local_tests_per_side if len(vis) == 1 else vis

    def grid(self):
        if self.shared_visibility is not None:
            return [(1.0 - float(v)) / 2 for v in np.atleast_1d(self.shared_visibility)]
        if self.qber_grid is None:
            return list(FIG_GRID)
        if isinstance(self.qber_grid, (int, float)) and not isinstance(self.qber_grid, bool):
            return [float(self.qber_grid)]
        if not isinstance(self.qber_grid, (list, tuple)):
            raise ConfigError("qber_grid", "must be a list of numbers")
        for q in self.qber_grid:
            if not _is_real(q):
                raise ConfigError("qber_grid", f"entry {q!r} is not a number")
        return [float(q) for q in self.qber_grid]

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be a JSON object")
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown field")
        return cls(**data)

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON ({exc})") from None
        return cls.from_dict(data)


def _is_real(v):
    return isinstance(v, (int, float, np.floating)) and not isinstance(v, bool) and math.isfinite(v)


@dataclass
class CurvePoint:
    qber: float
    rate_no_switch: float
    rate_one_switch: float
    rate_two_switch: float
    tier: str
    status: str = "ok"
    certificates: dict = field(default_factory=dict)

    def reported(self, value):
        if value is None or not math.isfinite(value):
            return value
        return max(REPORT_FLOOR, value)

    def csv_row(self):
        cells = [_fmt(self.qber), _fmt(self.rate_no_switch),
                 _fmt(self.reported(self.rate_one_switch)), _fmt(self.reported(self.rate_two_switch)),
                 self.tier, self.status]
        return ",".join(cells)


def _fmt(x):
    if x is None:
        return ""
    if not math.isfinite(x):
        return "nan"
    return format(float(x) + 0.0, ".9g")


def transfer_marginal_bounds(side_bounds):
    """Caps for the long-range problem: the smallest certified value per side.

    ``side_bounds`` maps ``"A"``/``"B"`` to a list of ``s_max`` values or of
    ``(s_max, solution)`` pairs.
    """
    caps = {}
    for side, bounds in side_bounds.items():
        values = [b[0] if isinstance(b, tuple) else b for b in bounds]
        if values:
            caps[side] = float(min(values))
    return caps


def certify_sides(cfg):
    """Local-test certificates per side: anticommutator caps and CHSH deficits."""
    out = {}
    for side in ("A", "B"):
        caps, eps, sols = [], [], []
        for v in cfg.visibilities(side):
            table = werner_chsh_table(v)
            # exact deficit of the Werner model; the Born-rule table agrees to
            # rounding, which sqrt(epsilon) would otherwise amplify
            exact = (1.0 - v) * math.sqrt(2) / 4
            if abs(exact - chsh_epsilon(chsh_winning_prob(table))) > 1e-12:
                raise DiKitError(f"local table for visibility {v} disagrees with the Werner model")
            eps.append(exact)
            if cfg.tier != "analytic":
                s, sol = bound_anticom_sq(table, level=cfg.npa_level)
                caps.append(s)
                sols.append(sol.residual_summary())
        out[side] = {"visibilities": cfg.visibilities(side), "epsilon": min(eps), "caps": caps, "solutions": sols}
    return out


def _point(args):
    cfg_dict, sides, q = args
    cfg = ScenarioConfig.from_dict(cfg_dict)
    try:
        return _compute_point(cfg, sides, q)
    except DiKitError as exc:
        return CurvePoint(q, 0.0, math.nan, math.nan, cfg.tier, "failed", {"error": str(exc)})


def _compute_point(cfg, sides, q):
    want_two = cfg.switches == "two"
    if cfg.tier == "analytic":
        certs = {
            side: thm1_rate(SelfTestParams(sides[side]["epsilon"], cfg.delta_constant), q, q)
            for side in ("A", "B")
        }
        one = certs["A"].rate
        two = max(certs["A"].rate, certs["B"].rate) if want_two else None
        return CurvePoint(q, 0.0, one, two, cfg.tier, "ok",
                          {"one_switch": certs["A"].to_dict(),
                           "two_switch": (certs["A"] if certs["A"].rate >= certs["B"].rate else certs["B"]).to_dict()
                           if want_two else None})

    caps = transfer_marginal_bounds({s: sides[s]["caps"] for s in ("A", "B")})
    table = werner_bb84_table(1.0 - 2.0 * q)
    if cfg.tier == "npo-eur":
        s_one, sol_one = long_range_anticom_bound(table, {"A": caps["A"]}, level=cfg.npa_level)
        cert_one = eur_rate(overlap_from_moment_bound(s_one), q, q, residuals={"s_max": s_one, **sol_one.residual_summary()})
        cert_two = None
        if want_two:
            s_raw, sol_two = long_range_anticom_bound(table, caps, level=cfg.npa_level)
            # the one-switch feasible set contains the two-switch one
            s_two = min(s_one, s_raw)
            cert_two = eur_rate(overlap_from_moment_bound(s_two), q, q,
                                residuals={"s_max": s_two, **sol_two.residual_summary()})
        finite = math.isfinite(cert_one.rate) and (cert_two is None or math.isfinite(cert_two.rate))
    else:
        cert_one = bff_entropy_bound(table, [("A", caps["A"])], m_nodes=cfg.m_nodes, level=cfg.npa_level, q_x=q, q_z=q)
        cert_two = None
        if want_two:
            raw = bff_entropy_bound(table, [("A", caps["A"]), ("B", caps["B"])], m_nodes=cfg.m_nodes,
                                    level=cfg.npa_level, q_x=q, q_z=q)
            cert_two = raw if raw.rate >= cert_one.rate else cert_one
        finite = math.isfinite(cert_one.rate) and (cert_two is None or math.isfinite(cert_two.rate))
    return CurvePoint(
        q, 0.0, cert_one.rate, cert_two.rate if cert_two else None, cfg.tier,
        "ok" if finite else "failed",
        {"one_switch": cert_one.to_dict(), "two_switch": cert_two.to_dict() if cert_two else None},
    )


def run_scenario(cfg, jobs=1):
    """Curve points for every QBER of the configuration, in grid order."""
    if cfg.tier == "npo-entropy" and not entropy_tier_enabled(cfg.enable_entropy_tier):
        raise ConfigError(
            "tier",
            "the npo-entropy tier is disabled; set enable_entropy_tier to true "
            "in the config or export DI_KIT_ENTROPY_TIER=1",
        )
    sides = certify_sides(cfg)
    work = [(cfg.to_dict(), sides, q) for q in cfg.grid()]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(_point, work))
    else:
        points = [_point(w) for w in work]
    return points, sides


def curve_csv(points):
    return "\n".join([CSV_HEADER] + [p.csv_row() for p in points]) + "\n"


def certificate_bundle(cfg, points, sides):
    bundle = {
        "config": cfg.to_dict(),
        "side_certificates": sides,
        "points": [
            {
                "qber": p.qber,
                "rate_no_switch": p.rate_no_switch,
                "rate_one_switch": p.rate_one_switch,
                "rate_two_switch": p.rate_two_switch,
                "tier": p.tier,
                "status": p.status,
                "certificates": p.certificates,
            }
            for p in points
        ],
    }
    return json.dumps(bundle, indent=2, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")
