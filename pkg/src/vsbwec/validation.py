"""Model checks: rigid-limit agreement with the oracle, refresh-interval study, sign guard."""
import math
from dataclasses import dataclass

import numpy as np

from . import hydro_coeffs
from .config import from_preset, rigid_validation_config
from .dynamics_engine import integrate, summarize, with_mode
from .hydro_coeffs import HydroGeometry, SurrogateProvider, excitation_coeff, hydrostatic_matrix
from .panel_geometry import mesh_sphere
from .rigid_oracle import compare, simulate_config
from .wave_field import RegularWave

INTERVALS = (0.3, 0.2, 0.1, 0.05)
VALIDATION_PRESET = "RS08"


@dataclass
class Check:
    name: str
    value: float
    limit: str
    passed: bool

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<38s} {self.value:>12.6g}  {self.limit}"


def validation_wave():
    from .presets import get
    row = get(VALIDATION_PRESET)
    return RegularWave(H=row.Hs, omega=2.0 * math.pi / row.Tp)


def rigid_limit(t_end=300.0, mode="one_way"):
    """Flexible engine with a near-rigid shell against the Cummins oracle."""
    cfg = rigid_validation_config(validation_wave(), t_end=t_end, mode=mode)
    flex = integrate(cfg)
    ref = simulate_config(cfg)
    return compare(ref, flex), flex, ref


def interval_study(t_end=None, intervals=INTERVALS, preset=VALIDATION_PRESET):
    """Steady pk-pk heave of two-way runs against the refresh interval."""
    base = from_preset(preset, mode="two_way")
    if t_end is not None:
        base = with_mode(base, "two_way", t_end=t_end)
    out = {}
    for dt in intervals:
        traj = integrate(with_mode(base, "two_way", fsi_interval=dt))
        out[dt] = summarize(traj, base.transient)["pkpk_z"]
    return out


def sign_ratio(omega=0.1, r=2.0, n=32):
    """``Ex[0] / K_h[0, 0]`` of the rigid sphere in a long wave; tends to +1."""
    geom = HydroGeometry.from_mesh(mesh_sphere(r, n, n), None)
    p_ex, _ = SurrogateProvider()(geom, [omega])
    return float(excitation_coeff(geom, p_ex[0])[0].real / hydrostatic_matrix(geom)[0, 0])


def run_all(t_end=300.0, quick=False):
    """Run every check; ``quick`` shortens the runs for smoke testing."""
    if quick:
        t_end = 40.0
    checks = []
    ratio = sign_ratio()
    checks.append(Check("excitation sign guard |Ex/K_h - 1|", abs(ratio - 1.0), "< 0.05",
                        abs(ratio - 1.0) < 0.05))
    cmp_, flex, _ = rigid_limit(t_end)
    checks.append(Check("rigid limit energy error (%)", cmp_["energy_pct"], "|.| <= 0.5",
                        abs(cmp_["energy_pct"]) <= 0.5))
    checks.append(Check("rigid limit heave RMS (% pk-pk)", cmp_["rms_pct"], "< 1",
                        cmp_["rms_pct"] < 1.0))
    pk = interval_study(t_end if quick else None)
    vals = [pk[dt] for dt in INTERVALS]
    diffs = np.diff(vals)
    monotone = bool(np.all(diffs >= 0) or np.all(diffs <= 0))
    checks.append(Check("interval sweep monotone", float(monotone), "== 1", monotone))
    rel = abs(pk[0.1] - pk[0.05]) / pk[0.05]
    checks.append(Check("interval sweep |pk(0.1)-pk(0.05)| rel", rel, "< 0.005", rel < 0.005))
    return checks, pk


def flipped_sign_guard():
    """Sign guard with the excitation sign reversed (mutation check)."""
    saved = hydro_coeffs.SIGMA_EX
    hydro_coeffs.SIGMA_EX = -saved
    try:
        return sign_ratio()
    finally:
        hydro_coeffs.SIGMA_EX = saved
