"""INI-style run configuration with sections [shell] [mesh] [wave] [pto] [sim].

Every key is checked against the schema below; an unknown section or key is
an error rather than a silently ignored typo. All values are SI.
"""
import configparser
import math
import os

from .dynamics_engine import SimConfig
from .hydro_coeffs import SurrogateProvider, TabulatedProvider, read_pressure_file
from .presets import IRREGULAR_E, PTO_C, RIGID_SHELL, SHELL_DEFAULTS, get as get_preset
from .shell_modal import ModalBasis, ShellProperties
from .wave_field import DEFAULT_BAND, DEFAULT_NFREQ, RegularWave, synthesize_irregular


class ConfigFileError(ValueError):
    """Unreadable or invalid configuration; ``code`` is a short machine tag."""

    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


SCHEMA = {
    "shell": {"model": str, "r": float, "h": float, "E": float, "nu": float, "rho": float, "N": int,
              "alpha_d": float, "beta_d": float, "A_norm": float, "form": str},
    "mesh": {"n_phi": int, "n_theta": int, "pressure_file": str, "kappa_d": float, "kappa_a": float},
    "wave": {"kind": str, "H": float, "omega": float, "T": float, "Hs": float, "Tp": float,
             "n_freq": int, "omega_min": float, "omega_max": float, "seed": int},
    "pto": {"c": float},
    "sim": {"mode": str, "fsi_interval": float, "dt": float, "t_end": float, "atol": float,
            "rtol": float, "buoy_mass": float, "D_x": float, "transient": float,
            "kernel_omega_min": float, "kernel_omega_max": float, "kernel_n_omega": int,
            "kernel_t_max": float, "added_mass_omega": float},
}

MODE_ALIASES = {"one-way": "one_way", "one_way": "one_way", "two-way": "two_way",
                "two_way": "two_way", "rigid": "rigid_oracle", "rigid_oracle": "rigid_oracle"}


def parse_file(path):
    """Parse and type-check a config file into ``{section: {key: value}}``."""
    if not os.path.isfile(path):
        raise ConfigFileError("missing_file", f"config file not found: {path}")
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise ConfigFileError("parse_error", f"{path}: {exc}") from exc
    out = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigFileError("unknown_section", f"{path}: unknown section [{section}]")
        out[section] = {}
        for key, raw in cp.items(section):
            if key not in SCHEMA[section]:
                raise ConfigFileError("unknown_key", f"{path}: unknown key '{key}' in [{section}]")
            try:
                out[section][key] = SCHEMA[section][key](raw.strip())
            except ValueError as exc:
                raise ConfigFileError("bad_value", f"{path}: [{section}] {key} = {raw!r}: {exc}") from exc
    return out


def build(sections, base_dir="."):
    """Turn parsed sections into a :class:`SimConfig`."""
    shell_s = dict(sections.get("shell", {}))
    mesh_s = sections.get("mesh", {})
    wave_s = dict(sections.get("wave", {}))
    sim_s = sections.get("sim", {})
    pto_s = sections.get("pto", {})

    model = shell_s.pop("model", "flexible")
    A_norm = shell_s.pop("A_norm", 1.0)
    form = shell_s.pop("form", "thin_shell")
    if model == "rigid":
        shell = None
        radius = shell_s.get("r", 2.0)
    elif model == "flexible":
        params = {**SHELL_DEFAULTS, "h": 0.1, **shell_s}
        try:
            shell = ShellProperties(**params)
            ModalBasis(shell, A_norm, form)
        except ValueError as exc:
            raise ConfigFileError("bad_shell", str(exc)) from exc
        radius = shell.r
    else:
        raise ConfigFileError("bad_value", f"[shell] model must be 'flexible' or 'rigid', got {model!r}")

    kind = wave_s.pop("kind", "regular")
    try:
        if kind == "regular":
            if "omega" in wave_s and "T" in wave_s:
                raise ConfigFileError("bad_value", "[wave] give either omega or T, not both")
            omega = wave_s.get("omega") or 2.0 * math.pi / wave_s.get("T", 3.5)
            wave = RegularWave(H=wave_s.get("H", 0.37), omega=omega)
        elif kind == "irregular":
            band = (wave_s.get("omega_min", DEFAULT_BAND[0]), wave_s.get("omega_max", DEFAULT_BAND[1]))
            wave = synthesize_irregular(wave_s.get("Hs", 0.37), wave_s.get("Tp", 3.5),
                                        wave_s.get("n_freq", DEFAULT_NFREQ), band, wave_s.get("seed", 0))
        elif kind == "none":
            wave = None
        else:
            raise ConfigFileError("bad_value", f"[wave] kind must be regular, irregular or none; got {kind!r}")
    except ValueError as exc:
        if isinstance(exc, ConfigFileError):
            raise
        raise ConfigFileError("bad_wave", str(exc)) from exc

    pfile = mesh_s.get("pressure_file")
    if pfile:
        path = pfile if os.path.isabs(pfile) else os.path.join(base_dir, pfile)
        if not os.path.isfile(path):
            raise ConfigFileError("missing_file", f"pressure file not found: {path}")
        n_panels = mesh_s.get("n_phi", 32) * mesh_s.get("n_theta", 32)
        try:
            provider = TabulatedProvider(read_pressure_file(path, n_panels=n_panels))
        except ValueError as exc:
            raise ConfigFileError(getattr(exc, "code", "bad_pressure_file"), str(exc)) from exc
    else:
        provider = SurrogateProvider(mesh_s.get("kappa_d", 0.1), mesh_s.get("kappa_a", 0.6))

    mode = MODE_ALIASES.get(sim_s.get("mode", "one_way"))
    if mode is None:
        raise ConfigFileError("bad_value", f"[sim] mode must be one-way, two-way or rigid; got {sim_s['mode']!r}")
    kw = dict(
        shell=shell, wave=wave, radius=radius, A_norm=A_norm, provider=provider, fsi_mode=mode,
        pto_c=pto_s.get("c", PTO_C),
        n_phi=mesh_s.get("n_phi", 32), n_theta=mesh_s.get("n_theta", 32),
    )
    for src, dst in (("fsi_interval", "fsi_interval"), ("dt", "dt_max"), ("t_end", "t_end"),
                     ("atol", "atol"), ("rtol", "rtol"), ("buoy_mass", "buoy_mass"), ("D_x", "D_x"),
                     ("transient", "transient"), ("kernel_t_max", "kernel_t_max"),
                     ("added_mass_omega", "added_mass_omega")):
        if src in sim_s:
            kw[dst] = sim_s[src]
    if any(k in sim_s for k in ("kernel_omega_min", "kernel_omega_max", "kernel_n_omega")):
        lo, hi, nk = SimConfig.__dataclass_fields__["kernel_omega"].default
        kw["kernel_omega"] = (sim_s.get("kernel_omega_min", lo), sim_s.get("kernel_omega_max", hi),
                              sim_s.get("kernel_n_omega", nk))
    if form != "thin_shell":
        kw["shell_form"] = form
    try:
        return SimConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigFileError("bad_sim", str(exc)) from exc


def load(path):
    return build(parse_file(path), os.path.dirname(os.path.abspath(path)))


def from_preset(preset_id, mode="two_way", wave_kind="regular", seed=0, **overrides):
    """Run configuration of a bundled sea state.

    Regular runs use ``H = Hs`` and ``omega = 2 pi / Tp``; irregular runs
    synthesize a Bretschneider sea with the row's irregular thickness.
    """
    row = get_preset(preset_id)
    if wave_kind == "regular":
        wave = RegularWave(H=row.Hs, omega=2.0 * math.pi / row.Tp)
        h = row.h_shell
        E = SHELL_DEFAULTS["E"]
    else:
        wave = synthesize_irregular(row.Hs, row.Tp, seed=seed)
        h = row.h_irregular if row.h_irregular is not None else row.h_shell
        E = IRREGULAR_E.get(row.id, SHELL_DEFAULTS["E"])
    shell = ShellProperties(**{**SHELL_DEFAULTS, "E": E, "h": h})
    mode = MODE_ALIASES.get(mode, mode)
    overrides.setdefault("t_end", row.duration)
    return SimConfig(shell=shell, wave=wave, fsi_mode=mode, **overrides)


def rigid_validation_config(wave, t_end=300.0, mode="one_way", **overrides):
    """Near-rigid flexible shell (nu = 0, E = 10 GPa, r = 2 m) for the oracle comparison."""
    return SimConfig(shell=ShellProperties(**RIGID_SHELL), wave=wave, t_end=t_end,
                     fsi_mode=mode, **overrides)


def dump(config):
    """INI text reproducing ``config`` (surrogate pressures only)."""
    lines = []
    if config.shell is None:
        lines += ["[shell]", "model = rigid", f"r = {config.radius!r}"]
    else:
        s = config.shell
        lines += ["[shell]", "model = flexible"] + [
            f"{k} = {getattr(s, k)!r}" for k in ("r", "h", "E", "nu", "rho", "N", "alpha_d", "beta_d")
        ] + [f"A_norm = {config.A_norm!r}"]
    prov = config.provider
    lines += ["", "[mesh]", f"n_phi = {config.n_phi}", f"n_theta = {config.n_theta}"]
    if isinstance(prov, SurrogateProvider):
        lines += [f"kappa_d = {prov.kappa_d!r}", f"kappa_a = {prov.kappa_a!r}"]
    w = config.wave
    lines += ["", "[wave]"]
    if w is None:
        lines += ["kind = none"]
    elif w.kind == "regular":
        lines += ["kind = regular", f"H = {w.H!r}", f"omega = {w.omega!r}"]
    else:
        lines += ["kind = irregular", f"Hs = {w.Hs!r}", f"Tp = {w.Tp!r}", f"n_freq = {w.n_freq}",
                  f"omega_min = {w.band[0]!r}", f"omega_max = {w.band[1]!r}", f"seed = {w.seed}"]
    lines += ["", "[pto]", f"c = {config.pto_c!r}", "", "[sim]",
              f"mode = {config.fsi_mode}", f"fsi_interval = {config.fsi_interval!r}",
              f"dt = {config.dt_max!r}", f"t_end = {config.t_end!r}", f"atol = {config.atol!r}",
              f"rtol = {config.rtol!r}", f"transient = {config.transient!r}"]
    if config.buoy_mass is not None:
        lines.append(f"buoy_mass = {config.buoy_mass!r}")
    if config.added_mass_omega is not None:
        lines.append(f"added_mass_omega = {config.added_mass_omega!r}")
    return "\n".join(lines) + "\n"
