"""Incident waves: regular trains, Bretschneider irregular seas and the excitation force."""
from dataclasses import dataclass

import numpy as np

RNG_NAME = "numpy.random.default_rng(PCG64)"

# default irregular band (rad/s); an alternative 0.1-6 rad/s band is also quoted
# for the irregular runs, so the band is configurable
DEFAULT_BAND = (0.1, 3.5)
DEFAULT_NFREQ = 256


class WaveError(ValueError):
    """Invalid wave definition."""


@dataclass(frozen=True)
class RegularWave:
    """Monochromatic wave of height ``H`` (crest to trough) and frequency ``omega``."""

    H: float
    omega: float

    def __post_init__(self):
        if not (self.H > 0 and self.omega > 0):
            raise WaveError("regular wave needs H > 0 and omega > 0")

    @property
    def eta(self):
        return 0.5 * self.H

    @property
    def omegas(self):
        return np.array([self.omega])

    @property
    def amps(self):
        return np.array([self.eta])

    @property
    def phases(self):
        return np.zeros(1)

    @property
    def kind(self):
        return "regular"

    def elevation(self, t):
        return self.eta * np.cos(self.omega * np.asarray(t))


@dataclass(frozen=True)
class IrregularWave:
    """Superposition of ``n_freq`` components with random phases."""

    Hs: float
    Tp: float
    omegas: np.ndarray
    amps: np.ndarray
    phases: np.ndarray
    seed: int
    band: tuple = DEFAULT_BAND
    rng: str = RNG_NAME

    @property
    def n_freq(self):
        return self.omegas.size

    @property
    def omega_min(self):
        return float(self.omegas[0])

    @property
    def omega_max(self):
        return float(self.omegas[-1])

    @property
    def kind(self):
        return "irregular"

    def elevation(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.cos(np.outer(t, self.omegas) + self.phases) @ self.amps


def bretschneider(f, Hs, Tp):
    """Bretschneider spectral density S(f) in m^2 s.

    Parameters
    ----------
    f : float or array_like
        Frequency in Hz, strictly positive.
    Hs : float
        Significant wave height (m).
    Tp : float
        Peak period (s).
    """
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise WaveError("spectrum frequency must be positive")
    fp4 = (1.0 / Tp) ** 4
    return 5.0 / 16.0 * fp4 / f**5 * Hs**2 * np.exp(-1.25 * fp4 / f**4)


def synthesize_irregular(Hs, Tp, n_freq=DEFAULT_NFREQ, band=DEFAULT_BAND, seed=0):
    """Equidistant-frequency sea state with amplitudes ``sqrt(2 S(f) df)``.

    ``band`` is given in rad/s. Component frequencies are the ``n_freq``
    equidistant points spanning the band, each carrying one ``df`` strip.
    """
    if n_freq < 2:
        raise WaveError("need at least two wave components")
    lo, hi = band
    if not 0 < lo < hi:
        raise WaveError("band must satisfy 0 < omega_min < omega_max")
    omegas = np.linspace(lo, hi, n_freq)
    f = omegas / (2.0 * np.pi)
    df = f[1] - f[0]
    amps = np.sqrt(2.0 * bretschneider(f, Hs, Tp) * df)
    phases = np.random.default_rng(seed).uniform(0.0, 2.0 * np.pi, n_freq)
    return IrregularWave(Hs=Hs, Tp=Tp, omegas=omegas, amps=amps, phases=phases,
                         seed=int(seed), band=(float(lo), float(hi)))


def spectral_moment0(Hs, Tp, f_max=None, n=200_001):
    """Zeroth spectral moment by fine trapezoid (tends to Hs^2/16)."""
    fp = 1.0 / Tp
    f = np.linspace(1e-3 * fp, f_max or 40.0 * fp, n)
    return float(np.trapezoid(bretschneider(f, Hs, Tp), f))


def excitation_force(t, wave, Ex):
    """Generalized excitation force at time ``t``.

    Parameters
    ----------
    t : float
    wave : RegularWave or IrregularWave
    Ex : ndarray
        Complex coefficients, shape (N+1,) for a regular wave or (N+1, n_freq)
        with one column per wave component.
    """
    Ex = np.asarray(Ex)
    phasor = wave.amps * np.exp(1j * (wave.omegas * t + wave.phases))
    if Ex.ndim == 1:
        Ex = Ex[:, None]
    if Ex.shape[1] != phasor.size:
        raise WaveError(f"need one Ex column per wave component ({phasor.size}), got {Ex.shape[1]}")
    return (Ex @ phasor).real


def spectrum_table(wave):
    """Component table ``f,S,amplitude,phase`` with a moment footer, as text."""
    f = wave.omegas / (2.0 * np.pi)
    S = bretschneider(f, wave.Hs, wave.Tp)
    lines = ["f,S,amplitude,phase"]
    lines += [",".join(repr(float(v)) for v in row) for row in zip(f, S, wave.amps, wave.phases)]
    lines += [
        f"# m0 = {spectral_moment0(wave.Hs, wave.Tp)!r}",
        f"# Hs^2/16 = {wave.Hs**2 / 16.0!r}",
        f"# seed = {wave.seed}",
        f"# rng = {wave.rng}",
    ]
    return "\n".join(lines) + "\n"


def write_spectrum_csv(wave, path):
    with open(path, "w") as fh:
        fh.write(spectrum_table(wave))
