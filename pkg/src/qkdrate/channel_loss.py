"""Line attenuation for free-space and fiber links, plus misalignment error."""

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
import math

import numpy as np
from scipy.integrate import quad

C_LIGHT = 299792458.0
ALT_CAP = 30000.0  # C_n^2 is negligible above this
FT = 0.3048


@dataclass(frozen=True)
class FreeSpaceGeometry:
    """Alice above Bob; the path length L is their altitude difference.

    The zenith angle enters the turbulence integrals as a single sec factor.
    """

    wavelength: float
    D_A: float
    D_B: float
    h_alice: float
    h_bob: float = 0.0
    zenith_angle: float = 0.0

    def __post_init__(self):
        if self.wavelength <= 0 or self.D_A <= 0 or self.D_B <= 0:
            raise ValueError("wavelength and apertures must be positive")
        if self.h_bob < 0 or self.h_alice <= self.h_bob:
            raise ValueError("need 0 <= h_bob < h_alice")
        if not 0 <= self.zenith_angle < math.pi / 2:
            raise ValueError("zenith_angle must lie in [0, pi/2)")

    @property
    def k(self):
        return 2 * math.pi / self.wavelength

    @property
    def L(self):
        return self.h_alice - self.h_bob

    @property
    def sec(self):
        return 1.0 / math.cos(self.zenith_angle)


def _clear1(h):
    # night profile, held at its 1.23 km value below that height
    x = max(h / 1000.0, 1.23)
    if x <= 2.13:
        lg = -10.7025 - 4.3507 * x + 0.8141 * x * x
    elif x <= 10.34:
        lg = -16.2897 + 0.0335 * x - 0.0134 * x * x
    else:
        lg = -17.0577 - 0.0449 * x - 0.0005 * x * x + 0.6181 * math.exp(-0.5 * ((x - 15.5617) / 3.4666) ** 2)
    return 10.0**lg


@dataclass(frozen=True)
class TurbulenceModel:
    """kind is "HV57", "CLEAR1", "none" or "custom" (then profile must be set)."""

    kind: str = "HV57"
    v: float = 21.0
    A: float = 1.7e-14
    profile: object = None

    def __post_init__(self):
        if self.kind not in ("HV57", "CLEAR1", "none", "custom"):
            raise ValueError(f"unknown turbulence model {self.kind!r}")
        if self.kind == "custom" and not callable(self.profile):
            raise ValueError("custom model needs a callable profile")

    @property
    def vacuum(self):
        return self.kind == "none"


def cn2(model: TurbulenceModel, h):
    if h < 0:
        raise ValueError("altitude must be >= 0")
    if model.kind == "none":
        return 0.0
    if model.kind == "CLEAR1":
        return _clear1(h)
    if model.kind == "custom":
        v = float(model.profile(h))
        if v < 0:
            raise ValueError("C_n^2 must be >= 0")
        return v
    return (
        0.00594 * (model.v / 27) ** 2 * (1e-5 * h) ** 10 * math.exp(-h / 1000)
        + 2.7e-16 * math.exp(-h / 1500)
        + model.A * math.exp(-h / 100)
    )


def _path_integral(g: FreeSpaceGeometry, model, weight):
    """int_0^L C_n^2(h_bob + z) weight(z) dz, cut where C_n^2 stops mattering."""
    top = min(g.L, max(ALT_CAP - g.h_bob, 0.0))
    if top <= 0:
        return 0.0
    breaks = [b for b in (100.0, 1000.0, 1230.0, 2130.0, 10000.0, 10340.0) if 0 < b - g.h_bob < top]
    val, err = quad(lambda z: cn2(model, g.h_bob + z) * weight(z), 0.0, top, points=breaks or None, limit=500, epsrel=1e-8)
    if not math.isfinite(val):
        raise ArithmeticError("turbulence quadrature did not converge")
    return val


def diffraction_radius(g: FreeSpaceGeometry):
    return math.sqrt(4 * g.L**2 / (g.k * g.D_A) ** 2 + (g.D_A / 2) ** 2)


def coherence_length_rho0(g: FreeSpaceGeometry, model: TurbulenceModel):
    if model.vacuum:
        return math.inf
    L = g.L
    I = _path_integral(g, model, lambda z: (1 - z / L) ** (5 / 3))
    if I <= 0:
        return math.inf
    return (1.46 * g.k**2 * g.sec * I) ** (-3 / 5)


def rho0_gate(g, model, L_o=100.0):
    """True when rho0 << D_A < L_o holds (<< read as a factor of 10)."""
    r0 = coherence_length_rho0(g, model)
    return 10 * r0 <= g.D_A < L_o


def _db(x):
    return 10 * math.log10(x)


def beam_spread_loss(g: FreeSpaceGeometry, model: TurbulenceModel):
    rs2 = diffraction_radius(g) ** 2
    r0 = coherence_length_rho0(g, model)
    if math.isfinite(r0):
        bracket = max(0.0, 1 - 0.62 * (r0 / g.D_A) ** (1 / 3))
        rs2 += 4 * g.L**2 / (g.k * r0) ** 2 * bracket ** (6 / 5)
    return min(0.0, _db(g.D_B**2 / (4 * rs2)))


def beam_wander_loss(g: FreeSpaceGeometry, model: TurbulenceModel, mitigation_db=30.0):
    """(raw, residual) wander loss in dB."""
    if mitigation_db < 0:
        raise ValueError("mitigation_db must be >= 0")
    r0 = coherence_length_rho0(g, model)
    if not math.isfinite(r0):
        return 0.0, 0.0
    rc2 = 2.97 * g.L**2 / (g.k**2 * r0 ** (5 / 3) * g.D_A ** (1 / 3))
    raw = min(0.0, _db(g.D_B**2 / (4 * rc2)))
    return raw, min(0.0, raw + mitigation_db)


@dataclass(frozen=True)
class Scintillation:
    sigma_chi2: float
    sigma_I2: float
    db: float
    rytov_ok: bool


def scintillation_loss(g: FreeSpaceGeometry, model: TurbulenceModel):
    if model.vacuum:
        return Scintillation(0.0, 0.0, 0.0, True)
    I = _path_integral(g, model, lambda z: z ** (5 / 6))
    s_chi = 0.56 * g.k ** (7 / 6) * g.sec ** (11 / 6) * I
    s_I = 4 * s_chi
    db = _db(1 - math.sqrt(s_I)) if s_I < 1 else math.nan
    return Scintillation(s_chi, s_I, db, s_I <= 0.3)


def pulse_distortion_gate(bandwidth, g: FreeSpaceGeometry, model, L_o=100.0, l_o=1e-3, threshold=0.1):
    """(ok, min_pulse_width) from the two short-pulse inequalities.

    C_n^2 is averaged over the whole path. The width is taken as 2 pi / Omega.
    """
    if not L_o > l_o > 0:
        raise ValueError("need L_o > l_o > 0")
    if model.vacuum:
        return True, 0.0
    L = g.L
    c_avg = _path_integral(g, model, lambda z: 1.0) / L
    if c_avg <= 0:
        return True, 0.0
    om1 = threshold * C_LIGHT * l_o ** (1 / 3) / (0.91 * c_avg * L**2)
    om2 = math.sqrt(threshold * C_LIGHT**2 / (0.39 * c_avg * L_o ** (5 / 3) * L))
    om_max = min(om1, om2)
    return bandwidth <= om_max, 2 * math.pi / om_max


class NoFascodeData(KeyError):
    pass


@lru_cache(maxsize=1)
def _static_table():
    text = resources.files("qkdrate").joinpath("data/static_atmosphere.txt").read_text()
    rows = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, weather, angle, db = line.split()
        rows.setdefault((key, weather), []).append((None if angle == "*" else float(angle), float(db)))
    return rows


def static_atmos_loss(scenario_key, weather, zenith_angle):
    """Tabulated molecular/aerosol/rain loss in dB; angle in radians."""
    entries = _static_table().get((scenario_key, weather))
    if not entries:
        raise NoFascodeData(f"no FASCODE data for {scenario_key!r}/{weather!r}")
    deg = math.degrees(zenith_angle)
    for angle, db in entries:
        if angle is None or abs(angle - deg) < 0.5:
            return db
    raise NoFascodeData(f"no FASCODE data for {scenario_key!r}/{weather!r} at {deg:g} deg")


@dataclass(frozen=True)
class LossBudget:
    static: float
    beam_spread: float
    beam_wander: float
    spatial_coh: float
    quantum_coh: float
    scintillation: float
    pulse_distortion: float
    optics_package: float
    static_source: str = ""

    @property
    def total_db(self):
        return (
            self.static + self.beam_spread + self.beam_wander + self.spatial_coh
            + self.quantum_coh + self.scintillation + self.pulse_distortion + self.optics_package
        )

    @property
    def alpha_linear(self):
        return 10 ** (self.total_db / 10)

    def items(self):
        return {
            "static": self.static,
            "beam_spread": self.beam_spread,
            "beam_wander": self.beam_wander,
            "spatial_coh": self.spatial_coh,
            "quantum_coh": self.quantum_coh,
            "scintillation": self.scintillation,
            "pulse_distortion": self.pulse_distortion,
            "optics_package": self.optics_package,
        }


def total_free_space_alpha(
    g: FreeSpaceGeometry,
    model: TurbulenceModel,
    scenario_key,
    weather="clear",
    optics_package_db=-5.0,
    wander_mitigation_db=30.0,
    pulse_bandwidth=None,
):
    static = static_atmos_loss(scenario_key, weather, g.zenith_angle)
    scint = scintillation_loss(g, model)
    if not math.isfinite(scint.db):
        raise ArithmeticError("scintillation too strong: loss undefined")
    pulse = 0.0
    if pulse_bandwidth is not None:
        ok, _ = pulse_distortion_gate(pulse_bandwidth, g, model)
        if not ok:
            raise ArithmeticError("pulse too short for this channel")
    return LossBudget(
        static=static,
        beam_spread=beam_spread_loss(g, model),
        beam_wander=beam_wander_loss(g, model, wander_mitigation_db)[1],
        spatial_coh=0.0,
        quantum_coh=0.0,
        scintillation=scint.db,
        pulse_distortion=pulse,
        optics_package=optics_package_db,
        static_source=f"table:{scenario_key}/{weather}",
    )


# ------------------------------------------------------------------ fiber

@dataclass(frozen=True)
class FiberParams:
    L_fiber: float  # km
    A: float = 0.2  # dB/km
    kappa: float = 5.0  # dB
    d_CD: float = 4.0  # ps/(nm km)
    delta_lambda: float = 0.8  # nm
    d_PMD: float = 0.1  # ps/sqrt(km)

    def __post_init__(self):
        if self.L_fiber < 0 or self.A < 0 or self.kappa < 0:
            raise ValueError("L_fiber, A and kappa must be >= 0")


def fiber_alpha(f: FiberParams):
    return 10 ** (-(f.A * f.L_fiber + f.kappa) / 10)


def dispersion_gates(f: FiberParams, tau, tau_coh):
    """Delays in seconds and whether each stays under both tau and tau_coh."""
    t_cd = f.d_CD * f.L_fiber * f.delta_lambda * 1e-12
    t_pmd = f.d_PMD * math.sqrt(f.L_fiber) * 1e-12
    return t_cd, t_pmd, t_cd < tau and t_cd < tau_coh, t_pmd < tau and t_pmd < tau_coh


# ------------------------------------------------------------ misalignment

def misalignment_rc(delta):
    return math.sin(delta) ** 2


NOMINAL_ANGLES = (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4)


def appendixA_probs(theta_e, theta_r, p_e, p_r):
    """(p_detect, p_keep, p_error) for four emitted and four analyzer angles.

    States i and i+2 share a basis and are orthogonal; an error is a click
    behind the analyzer orthogonal to the one matching Alice's state.
    """
    p_e = np.asarray(p_e, float)
    p_r = np.asarray(p_r, float)
    for p in (p_e, p_r):
        if p.shape != (4,) or abs(p.sum() - 1) > 1e-12 or (p < 0).any():
            raise ValueError("probability vectors must have 4 nonnegative entries summing to 1")
    te = np.asarray(theta_e, float)
    tr = np.asarray(theta_r, float)
    w = np.outer(p_e, p_r) * np.cos(te[:, None] - tr[None, :]) ** 2
    basis = np.arange(4) % 2
    compat = basis[:, None] == basis[None, :]
    cross = (np.arange(4)[None, :] == (np.arange(4)[:, None] + 2) % 4)
    p_detect = w.sum()
    keep = w[compat].sum()
    err = w[cross].sum()
    return float(p_detect), float(keep / p_detect), float(err / keep)
