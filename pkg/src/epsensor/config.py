"""System configuration for the magnon-cavity sensor.

All frequencies (couplings, detunings, perturbations, decay rates) are
dimensionless, expressed in units of the first particle-conserving coupling
kappa[0] (the reference coupling). A single scale factor, supplied by the
user, converts them to physical rad/s; see ``metrology.feasibility_check``
for the documented conversion used in reports.
"""

from dataclasses import dataclass, replace

import numpy as np


class ConfigurationError(ValueError):
    """Invalid or inconsistent system/scenario parameters."""


class RegimeError(ValueError):
    """Operation requested outside its domain of validity."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge; message carries diagnostics."""


@dataclass(frozen=True)
class SystemConfig:
    """Physical parameters of the n-mode magnon-cavity system.

    Modes 1..m couple to the cavity through particle-nonconserving
    (two-mode-squeezing) interactions of strength g[i]; modes m+1..n-1
    couple through particle-conserving (beam-splitter) interactions of
    strength kappa[j]. The cavity is mode n.

    Fields
    ------
    n       total mode count (magnons plus cavity), n >= 2
    m       number of squeezing-coupled magnon modes, 1 <= m <= n-1
    g       squeezing coupling strengths, length m
    kappa   beam-splitter coupling strengths, length n-m-1
    delta   two-photon detunings, length n-1
    epsilon detuning perturbations (the quantities being sensed), length n-1
    gamma   cavity decay rate
    Gamma   magnon decay rate (same for all magnon modes)
    alpha   initial coherent amplitudes of the magnon modes, length n-1
    """

    n: int
    m: int
    g: tuple
    kappa: tuple = ()
    delta: tuple = ()
    epsilon: tuple = ()
    gamma: float = 0.0
    Gamma: float = 0.0
    alpha: tuple = ()

    def __post_init__(self):
        n, m = self.n, self.m
        if n < 2:
            raise ConfigurationError(f"need n >= 2 modes, got n={n}")
        if not 1 <= m <= n - 1:
            raise ConfigurationError(f"need 1 <= m <= n-1, got m={m}, n={n}")
        object.__setattr__(self, "g", tuple(float(x) for x in np.atleast_1d(self.g)))
        object.__setattr__(self, "kappa", tuple(float(x) for x in np.atleast_1d(self.kappa)))
        delta = self.delta if len(np.atleast_1d(self.delta)) else (0.0,) * (n - 1)
        eps = self.epsilon if len(np.atleast_1d(self.epsilon)) else (0.0,) * (n - 1)
        alpha = self.alpha if len(np.atleast_1d(self.alpha)) else (0.0,) * (n - 1)
        object.__setattr__(self, "delta", tuple(float(x) for x in np.atleast_1d(delta)))
        object.__setattr__(self, "epsilon", tuple(float(x) for x in np.atleast_1d(eps)))
        object.__setattr__(self, "alpha", tuple(complex(x) for x in np.atleast_1d(alpha)))
        if len(self.g) != m:
            raise ConfigurationError(f"g must have length m={m}, got {len(self.g)}")
        if len(self.kappa) != n - m - 1:
            raise ConfigurationError(
                f"kappa must have length n-m-1={n - m - 1}, got {len(self.kappa)}")
        for name in ("delta", "epsilon", "alpha"):
            if len(getattr(self, name)) != n - 1:
                raise ConfigurationError(
                    f"{name} must have length n-1={n - 1}, got {len(getattr(self, name))}")
        if any(x < 0 for x in self.g) or any(x < 0 for x in self.kappa):
            raise ConfigurationError("coupling strengths must be >= 0")
        if self.gamma < 0 or self.Gamma < 0:
            raise ConfigurationError("decay rates must be >= 0")

    @property
    def detuning_eff(self):
        """Effective detunings delta_i + epsilon_i, length n-1."""
        return tuple(d + e for d, e in zip(self.delta, self.epsilon))

    @property
    def lossless(self):
        return self.gamma == 0.0 and self.Gamma == 0.0

    def with_perturbation(self, eps, mode="same"):
        """Return a copy with the perturbation set on the magnon detunings.

        mode "same" applies eps to every magnon mode; "single" (alias
        "different") applies it to mode 1 only and zeroes the rest.
        """
        if mode == "same":
            new = (float(eps),) * (self.n - 1)
        elif mode in ("single", "different"):
            new = (float(eps),) + (0.0,) * (self.n - 2)
        else:
            raise ConfigurationError(f"unknown perturbation mode {mode!r}")
        return replace(self, epsilon=new)

    def with_couplings(self, g=None, kappa=None):
        return replace(self, g=g if g is not None else self.g,
                       kappa=kappa if kappa is not None else self.kappa)

    def with_losses(self, gamma=None, Gamma=None):
        return replace(self, gamma=self.gamma if gamma is None else float(gamma),
                       Gamma=self.Gamma if Gamma is None else float(Gamma))


def collective_rate(config):
    """Oscillation rate chi = sqrt(kappa^2 - g^2 - (gamma-Gamma)^2/4).

    Defined for the three-mode sensor (n=3, m=1). Vanishes at the
    third-order exceptional point; sets the working-point period 2*pi/chi.
    """
    if (config.n, config.m) != (3, 1):
        raise ConfigurationError("collective rate is defined for the n=3, m=1 sensor")
    gm = config.gamma - config.Gamma
    chi2 = config.kappa[0] ** 2 - config.g[0] ** 2 - gm * gm / 4.0
    if chi2 <= 0:
        raise RegimeError(
            f"chi^2 = {chi2:g} <= 0: system at or beyond the exceptional point")
    return float(np.sqrt(chi2))


def ep3_sensor(g, kappa=1.0, alpha=2.0, eps1=0.0, eps2=0.0, gamma=0.0, Gamma=0.0):
    """Three-mode sensor: one squeezing-coupled and one swap-coupled magnon.

    Magnons start in opposite imaginary coherent states (i*alpha, -i*alpha),
    the configuration that routes the detuning signal into the X quadratures.
    """
    return SystemConfig(n=3, m=1, g=(g,), kappa=(kappa,), delta=(0.0, 0.0),
                        epsilon=(eps1, eps2), gamma=gamma, Gamma=Gamma,
                        alpha=(1j * alpha, -1j * alpha))


def ep4_system(f, g1=None, eps=0.0, alpha=0.0):
    """Four-mode system (two squeezing + one swap magnon) at the fourth-order
    exceptional-point locus for coupling ratio f, optionally with g1 moved off
    the locus and a common detuning perturbation applied."""
    from .model import ep4_locus  # local import to avoid a cycle

    locus = ep4_locus(f)
    g1 = locus.g if g1 is None else g1
    return SystemConfig(
        n=4, m=2, g=(g1, f), kappa=(1.0,),
        delta=(locus.delta1, locus.delta2, locus.delta3),
        epsilon=(eps, eps, eps),
        alpha=(1j * alpha, 1j * alpha, -1j * alpha))
