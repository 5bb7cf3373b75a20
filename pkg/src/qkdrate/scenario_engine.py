"""Named link scenarios, parameter sweeps and human-readable reports."""

from dataclasses import dataclass, field, replace
import csv
import io
import math

from qkdrate.auth_cost import AuthParams
from qkdrate.channel_loss import (
    FT,
    FiberParams,
    FreeSpaceGeometry,
    LossBudget,
    TurbulenceModel,
    fiber_alpha,
    total_free_space_alpha,
)
from qkdrate.loads import ECParams, comm_load, comp_load
from qkdrate.privacy_amp import AttackContext, region_classify
from qkdrate.secrecy import Optimum, SystemParams, optimize_mu, secrecy_capacity

LEO_ALT = 300e3
GEO_ALT = 35783e3
HEP_DARK = 4.25e-18
COMMERCIAL_DARK = 1e-6


@dataclass(frozen=True)
class FreeSpaceLink:
    geometry: FreeSpaceGeometry
    table_key: str
    weather: str = "clear"
    turbulence: TurbulenceModel = field(default_factory=TurbulenceModel)


@dataclass(frozen=True)
class FiberLink:
    fiber: FiberParams
    cable: str = "untouched"  # or "replaced"

    def __post_init__(self):
        if self.cable not in ("untouched", "replaced"):
            raise ValueError("cable must be 'untouched' or 'replaced'")


@dataclass(frozen=True)
class Scenario:
    """A complete link description.

    alpha_db, when set, overrides whatever the link model would give; the
    link model is then only used for the loss report.
    mu_fixed skips the optimizer and evaluates at that photon number.
    """

    name: str
    eta: float = 0.5
    r_c: float = 0.005
    r_d: float = HEP_DARK
    tau: float = 1e-10
    m: float = 2e8
    alpha_db: float | None = None
    link: FreeSpaceLink | FiberLink | None = None
    mcs: bool = False
    direct_strength_factor: float = 1.0
    x: float = 1.16
    g: int = 30
    epsilon: float = 1e-9
    mu_fixed: float | None = None
    bracket: tuple = (1e-4, 2.0)
    notes: tuple = ()
    expected_R: float | None = None
    expected_mu: float | None = None

    def __post_init__(self):
        if self.alpha_db is None and self.link is None:
            raise ValueError(f"scenario {self.name!r} needs alpha_db or a link model")
        if self.alpha_db is not None and self.alpha_db > 0:
            raise ValueError("alpha_db must be <= 0")

    @property
    def medium(self):
        if isinstance(self.link, FiberLink) and self.link.cable == "replaced":
            return "fiber"
        return "free_space"

    def loss_budget(self) -> LossBudget | None:
        if isinstance(self.link, FreeSpaceLink):
            return total_free_space_alpha(self.link.geometry, self.link.turbulence, self.link.table_key, self.link.weather)
        return None

    def alpha(self):
        if self.alpha_db is not None:
            return 10 ** (self.alpha_db / 10)
        if isinstance(self.link, FiberLink):
            return fiber_alpha(self.link.fiber)
        return self.loss_budget().alpha_linear

    def system_params(self, mu=0.1) -> SystemParams:
        return SystemParams(
            eta=self.eta,
            mu=mu,
            alpha=self.alpha(),
            r_c=self.r_c,
            r_d=self.r_d,
            m=self.m,
            g_pa=self.g,
            auth=AuthParams(self.g, self.g, self.g),
            epsilon=self.epsilon,
            x=self.x,
            tau=self.tau,
            mcs=self.mcs,
            medium=self.medium,
            attack=AttackContext(direct_strength_factor=self.direct_strength_factor),
        )


def _leo(D_B, h_bob=0.0, zenith=0.0):
    return FreeSpaceGeometry(1550e-9, 0.3, D_B, LEO_ALT, h_bob, zenith)


def _geo(D_B, h_bob):
    return FreeSpaceGeometry(1550e-9, 0.3, D_B, GEO_ALT, h_bob)


_NO_TURB = TurbulenceModel("none")
_RAIN = ("modified attack model: mcs with a one-third direct-attack strength",)

PRESETS = {
    s.name: s
    for s in [
        Scenario(
            "aircraft_leo_clear",
            alpha_db=-10.0,
            link=FreeSpaceLink(_leo(0.58, 35000 * FT), "35000ft_LEO", turbulence=_NO_TURB),
            expected_R=57e6,
            expected_mu=0.455,
        ),
        Scenario(
            "ground_leo_clear",
            alpha_db=-20.0,
            link=FreeSpaceLink(_leo(0.5), "ground_LEO"),
            expected_R=1.3e6,
            expected_mu=0.131,
        ),
        Scenario(
            "ground_leo_clear_large_aperture",
            alpha_db=-10.0,
            link=FreeSpaceLink(_leo(1.6), "ground_LEO"),
            expected_R=57e6,
            expected_mu=0.455,
        ),
        Scenario(
            "ground_leo_light_rain",
            alpha_db=-60.0,
            link=FreeSpaceLink(_leo(0.43, zenith=math.pi / 4), "ground_LEO", "light_rain"),
            m=2e15,
            mcs=True,
            direct_strength_factor=1 / 3,
            bracket=(1e-5, 0.5),
            notes=_RAIN,
            expected_R=5.0,
        ),
        Scenario(
            "ground_leo_light_rain_large_aperture",
            alpha_db=-50.0,
            link=FreeSpaceLink(_leo(1.4, zenith=math.pi / 4), "ground_LEO", "light_rain"),
            m=2e15,
            mcs=True,
            direct_strength_factor=1 / 3,
            bracket=(1e-5, 0.5),
            notes=_RAIN,
            expected_R=164.0,
        ),
        Scenario(
            "ground_leo_moderate_rain",
            alpha_db=-76.0,
            link=FreeSpaceLink(_leo(1.6), "ground_LEO", "moderate_rain"),
            m=2e15,
            mcs=True,
            direct_strength_factor=1 / 3,
            bracket=(1e-5, 0.5),
            notes=_RAIN,
        ),
        Scenario(
            "earth_geo_clear",
            alpha_db=-26.4,
            link=FreeSpaceLink(_geo(10.0, 13500 * FT), "13500ft_GEO", turbulence=_NO_TURB),
            m=2e9,
            mcs=True,
            bracket=(1e-4, 1.0),
            expected_R=240e3,
            expected_mu=0.0891,
        ),
        Scenario(
            "fiber_10km_02",
            r_c=0.01,
            link=FiberLink(FiberParams(10.0, 0.2, 5.0)),
            mu_fixed=0.4,
            expected_R=115e6,
        ),
        Scenario(
            "fiber_10km_02_replaced",
            r_c=0.01,
            link=FiberLink(FiberParams(10.0, 0.2, 5.0), "replaced"),
            mu_fixed=0.1,
            expected_R=29e6,
        ),
        Scenario(
            "aircraft_leo_commercial",
            alpha_db=-10.0,
            r_d=COMMERCIAL_DARK,
            tau=1e-6,
            link=FreeSpaceLink(_leo(0.58, 35000 * FT), "35000ft_LEO", turbulence=_NO_TURB),
            expected_R=5700.0,
            expected_mu=0.455,
        ),
    ]
}


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; known: {', '.join(sorted(PRESETS))}") from None


@dataclass
class ScenarioResult:
    scenario: Scenario
    alpha: float
    optimum: Optimum
    secrecy: object
    loss_budget: LossBudget | None
    comm: object | None
    comp: object | None

    @property
    def viable(self):
        return self.optimum.viable

    @property
    def region(self):
        return self.secrecy.region


def run_scenario(s: Scenario) -> ScenarioResult:
    p = s.system_params()
    if s.mu_fixed is not None:
        r = secrecy_capacity(p.with_mu(s.mu_fixed))
        opt = Optimum(s.mu_fixed, r.S, r.R, r.S > 0)
    else:
        opt = optimize_mu(p, s.bracket)
        r = secrecy_capacity(p.with_mu(opt.mu))
    budget = None
    if isinstance(s.link, FreeSpaceLink):
        budget = s.loss_budget()
    n = r.terms["n"] * s.m
    e_T = r.terms["e_T"] * s.m
    comm = comp = None
    if n >= 4 and 0 <= e_T < n:
        ec = ECParams(n, e_T)
        tags = AuthParams(s.g, s.g, s.g)
        comm = comm_load(n, s.m, ec, tags=tags, tau=s.tau)
        comp = comp_load(n, s.m, ec, tags=tags, tau=s.tau)
    return ScenarioResult(s, p.alpha, opt, r, budget, comm, comp)


SWEEP_VARS = ("tau", "mu", "D_B", "L_fiber", "r_c", "eta", "alpha_db")


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    grid: tuple

    def __post_init__(self):
        if self.variable not in SWEEP_VARS:
            raise ValueError(f"sweep variable must be one of {SWEEP_VARS}")
        g = list(self.grid)
        if not g or any(not math.isfinite(v) for v in g) or g != sorted(g):
            raise ValueError("grid must be finite and sorted")


def _with_value(s: Scenario, var, v):
    if var in ("tau", "r_c", "eta", "alpha_db"):
        return replace(s, **{var: v})
    if var == "mu":
        return replace(s, mu_fixed=v)
    if var == "D_B":
        if not isinstance(s.link, FreeSpaceLink):
            raise ValueError("D_B sweep needs a free-space link")
        g = replace(s.link.geometry, D_B=v)
        return replace(s, link=replace(s.link, geometry=g), alpha_db=None)
    if not isinstance(s.link, FiberLink):
        raise ValueError("L_fiber sweep needs a fiber link")
    return replace(s, link=replace(s.link, fiber=replace(s.link.fiber, L_fiber=v)), alpha_db=None)


SWEEP_COLUMNS = ("value", "alpha_db", "mu_opt", "S_opt_bits_per_pulse", "R_opt_bits_per_s", "viable")


def sweep(s: Scenario, spec: SweepSpec):
    rows = []
    for v in spec.grid:
        r = run_scenario(_with_value(s, spec.variable, v))
        rows.append(
            dict(
                value=v,
                alpha_db=10 * math.log10(r.alpha),
                mu_opt=r.optimum.mu,
                S_opt_bits_per_pulse=r.optimum.S,
                R_opt_bits_per_s=r.optimum.R,
                viable=int(r.viable),
            )
        )
    return rows


def fmt(v):
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


def rows_to_csv(rows, columns, fh=None):
    out = fh or io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) for c in columns])
    return out.getvalue() if fh is None else None


def _dominant_cost(terms):
    costs = {k: terms[k] for k in ("q", "t", "nu", "a", "g_pa")}
    return max(costs, key=costs.get)


_TERM_NAMES = {
    "q": "reconciliation leakage",
    "t": "single-photon defense frontier",
    "nu": "multi-photon subtraction",
    "a": "authentication cost",
    "g_pa": "privacy-amplification margin",
}


def report(res: ScenarioResult):
    s = res.scenario
    lines = [f"scenario: {s.name}"]
    lines += [f"  note: {n}" for n in s.notes]
    if res.loss_budget is not None:
        lines.append("loss budget (dB):")
        for k, v in res.loss_budget.items().items():
            lines.append(f"  {k:<18}{v:10.4f}")
        lines.append(f"  {'total':<18}{res.loss_budget.total_db:10.4f}  [{res.loss_budget.static_source}]")
        if s.alpha_db is not None:
            lines.append(f"  alpha used: {s.alpha_db:.4f} dB (scenario value)")
    elif isinstance(s.link, FiberLink):
        f = s.link.fiber
        lines.append(f"fiber: {f.L_fiber:g} km at {f.A:g} dB/km, bulk {f.kappa:g} dB, cable {s.link.cable}")
        if s.link.cable == "replaced":
            lines.append("  Eve may swap the cable: region logic also uses y = eta")
    lines.append(f"alpha: {res.alpha:.6g} ({10 * math.log10(res.alpha):.4f} dB)")
    lines.append(f"attack region: {res.region.region} (y = {res.region.y:.6g})")
    o = res.optimum
    tag = "fixed" if s.mu_fixed is not None else "optimal"
    lines.append(f"mu ({tag}): {o.mu:.6g}")
    lines.append(f"S: {o.S:.6g} bits/pulse")
    lines.append(f"R: {o.R:.6g} bits/s")
    lines.append("secrecy terms (per pulse):")
    for k, v in res.secrecy.terms.items():
        lines.append(f"  {k:<6}{v:.6g}")
    if res.comm is not None:
        lines.append(f"comm load: B->A {res.comm.R_BA:.6g} bits/s, A->B {res.comm.R_AB:.6g} bits/s")
    if res.comp is not None:
        lines.append(f"compute load: {res.comp.ops:.6g} ops/block, {res.comp.rate:.6g} ops/s")
    if o.viable:
        lines.append("viable: yes")
    else:
        dom = _dominant_cost(res.secrecy.terms)
        lines.append(f"viable: no (S_opt <= 0; largest subtraction is the {_TERM_NAMES[dom]})")
    return "\n".join(lines) + "\n"


def region_of(s: Scenario):
    return region_classify(s.eta * s.alpha())
