"""Sensing figures of merit: susceptibility, noise, sensitivity, quantum
Fisher information, standard-quantum-limit comparison, and scaling fits.

Conventions (also echoed in report metadata):
- the sensed parameter is a common shift eps of the magnon detunings
  ("same" mode); shifting only mode 1 is the "different" mode;
- working points are t = 2 q pi / chi with chi evaluated at eps = 0;
- the SQL reference 1/sqrt(N t) uses N = peak total excitation over [0, t],
  sampled on a fixed uniform grid;
- decibel comparisons are 20 log10 of a sensitivity ratio (power dB of the
  variance ratio);
- physical units: frequencies quoted in Hz are rad/s divided by 2 pi.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .config import (ConfigurationError, RegimeError, collective_rate,
                     ep3_sensor, ep4_system)
from .gaussian import (apply_external_loss, coherent_init, evolve,
                       evolve_lossy, evolve_lossy_trace, propagator,
                       total_excitation, two_mode_squeezer_coefficients)
from .model import ep4_locus
from .spectral import eigensolve


@dataclass(frozen=True)
class Observable:
    """Linear quadrature observable O = coefficients . mu_hat."""

    coefficients: np.ndarray
    name: str = ""

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if not c.any():
            raise ConfigurationError("observable coefficients must be nonzero")
        object.__setattr__(self, "coefficients", c)

    def mean(self, state):
        return float(self.coefficients @ state.mu)

    def variance(self, state):
        return float(self.coefficients @ state.cov @ self.coefficients)


def observable(spec, n_modes):
    """Parse "X1-X2", "P1+P2", "X1", ... into an Observable on n_modes."""
    text = spec.replace(" ", "")
    c = np.zeros(2 * n_modes)
    sign = 1.0
    token = ""

    def flush(token, sign):
        if not token:
            raise ConfigurationError(f"malformed observable {spec!r}")
        kind, idx = token[0].upper(), int(token[1:])
        if kind not in "XP" or not 1 <= idx <= n_modes:
            raise ConfigurationError(f"bad quadrature {token!r} in {spec!r}")
        c[2 * (idx - 1) + (0 if kind == "X" else 1)] += sign

    for ch in text:
        if ch == "+" or ch == "-":
            if token:
                flush(token, sign)
            sign, token = (1.0 if ch == "+" else -1.0), ""
        else:
            token += ch
    flush(token, sign)
    return Observable(coefficients=c, name=spec)


def x_minus(n_modes=3):
    return observable("X1-X2", n_modes)


def x_plus(n_modes=3):
    return observable("X1+X2", n_modes)


@dataclass(frozen=True)
class SensitivityReport:
    g: float
    kappa: float
    alpha: float
    gamma: float
    Gamma: float
    eta: float
    t: float
    chi: float
    observable: str
    susceptibility: float
    noise_var: float
    delta_eps: float
    qfi: float
    qcrb: float
    sql: float
    valid_regime: bool
    n_peak: float

    CSV_FIELDS = ("g", "kappa", "alpha", "gamma", "Gamma", "eta", "t", "chi",
                  "observable", "susceptibility", "noise_var", "delta_eps",
                  "qfi", "qcrb", "sql", "valid_regime")

    def csv_row(self):
        return [getattr(self, f) for f in self.CSV_FIELDS]


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    intercept: float
    r_squared: float
    chis: np.ndarray
    values: np.ndarray
    excluded: tuple = ()


def working_point_time(config, q=1):
    """t = 2 q pi / chi, with chi at eps = 0."""
    return 2.0 * np.pi * q / collective_rate(config.with_perturbation(0.0))


def _final_state(config, t, eta=None):
    state = coherent_init(config)
    if config.lossless:
        state = evolve(state, propagator(config, t))
    else:
        state = evolve_lossy(state, config, t)
    if eta is not None:
        n = config.n
        per_mode = [eta] * (n - 1) + [1.0]   # losses act on the measured magnons
        state = apply_external_loss(state, per_mode)
    return state


def susceptibility(config, obs, t, method="fd", mode="same", step=1e-9, eta=None):
    """|d<O>/d(eps)| at the configured perturbation offset.

    method "fd": central finite difference on the exact Gaussian evolution
    (lossy evolution when decay rates are nonzero). method "analytic":
    closed first-order forms for the lossless three-mode sensor at
    delta = 0 with amplitudes (i alpha, -i alpha), valid for the X1-X2 and
    X1+X2 observables in mode "same".
    """
    if method == "fd":
        eps0 = config.epsilon[0]

        def mean(e):
            return obs.mean(_final_state(config.with_perturbation(e, mode), t, eta))

        return abs(mean(eps0 + step) - mean(eps0 - step)) / (2.0 * step)
    if method == "analytic":
        return _analytic_susceptibility(config, obs, t, mode, eta)
    raise ConfigurationError(f"unknown susceptibility method {method!r}")


def _sensor_shape(config):
    """(g, kappa, alpha) for the canonical three-mode sensor, else error."""
    if (config.n, config.m) != (3, 1):
        raise ConfigurationError("analytic forms exist for the n=3, m=1 sensor only")
    if not config.lossless:
        raise ConfigurationError("analytic forms are lossless")
    if any(config.delta):
        raise ConfigurationError("analytic forms assume delta = 0")
    a1, a2 = config.alpha
    if abs(a1 + a2) > 1e-12 or abs(a1.real) > 1e-12:
        raise ConfigurationError(
            "analytic forms assume amplitudes (i alpha, -i alpha) with real alpha")
    return config.g[0], config.kappa[0], a1.imag


def _analytic_susceptibility(config, obs, t, mode, eta):
    if mode != "same":
        raise ConfigurationError("analytic susceptibility covers the 'same' mode")
    g, k, alpha = _sensor_shape(config)
    gt, tt = g / k, t * k
    chi = np.sqrt(1.0 - gt * gt)
    ct = chi * tt
    name = obs.name.replace(" ", "").upper()
    if name == "X1-X2":
        xi = (1.0 + gt * gt) * ct * (2.0 + np.cos(ct)) \
            + (gt * gt - 8.0 * gt + 1.0) * np.sin(ct)
        s = np.sqrt(2.0) * abs(alpha) * (1.0 + gt) ** 2 * xi / (2.0 * chi ** 5)
    elif name == "X1+X2":
        s = np.sqrt(2.0) * abs(alpha) * (1.0 + gt * gt) \
            * (ct * (1.0 - np.cos(ct) / 2.0) + np.sin(ct) / 2.0) / chi ** 3
    else:
        raise ConfigurationError(
            f"no analytic susceptibility for observable {obs.name!r}")
    s = s / k
    if eta is not None:
        s *= np.sqrt(eta)
    return float(abs(s))


def noise_variance(config, obs, t, eta=None):
    """var(O) of the evolved state (covariance propagation)."""
    return obs.variance(_final_state(config, t, eta))


def analytic_noise(config, obs, t):
    """Closed-form var(O) for the lossless sensor:
    [kappa - g cos(chi t)]^2/(kappa - g)^2 for X1-X2 and
    [kappa + g cos(chi t)]^2/(kappa + g)^2 for X1+X2."""
    g, k, _ = _sensor_shape(config)
    ct = collective_rate(config) * t
    name = obs.name.replace(" ", "").upper()
    if name == "X1-X2":
        return float(((k - g * np.cos(ct)) / (k - g)) ** 2)
    if name == "X1+X2":
        return float(((k + g * np.cos(ct)) / (k + g)) ** 2)
    raise ConfigurationError(f"no closed-form noise for observable {obs.name!r}")


# ---------------------------------------------------------------------------
# quantum Fisher information

def _qfi_step(config, step):
    if step is not None:
        return step
    try:
        chi = collective_rate(config)
        return 1e-7 * chi ** 3
    except (ConfigurationError, RegimeError):
        return 1e-9


def qfi_parts(config, t, eps0=0.0, mode="same", step=None, rcond=1e-10):
    """(I_total, I_mu, I_cov, solver_ok) of the evolved Gaussian state with
    respect to the detuning perturbation.

    I_mu = dmu^T cov^-1 dmu; I_cov = Tr[Phi dcov]/2 where Phi solves
    dcov = cov Phi cov - Omega Phi Omega^T (vectorized least-squares with
    pseudo-inverse regularization; for pure states the system is rank
    deficient and the minimum-norm solution is the correct one). Derivatives
    are central finite differences with step ~ 1e-7 chi^3. If the solve
    residual is large, solver_ok is False and I_cov is reported as 0 so the
    total is the displacement lower bound.
    """
    h = _qfi_step(config, step)

    def state(e):
        return _final_state(config.with_perturbation(e, mode), t)

    sp, sm, s0 = state(eps0 + h), state(eps0 - h), state(eps0)
    dmu = (sp.mu - sm.mu) / (2.0 * h)
    dcov = (sp.cov - sm.cov) / (2.0 * h)
    cov = s0.cov
    i_mu = float(dmu @ np.linalg.solve(cov, dmu))

    n2 = cov.shape[0]
    om = np.kron(np.eye(n2 // 2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    M = np.kron(cov, cov) - np.kron(om, om)
    rhs = dcov.flatten(order="F")
    sol, _, _, _ = np.linalg.lstsq(M, rhs, rcond=rcond)
    residual = float(np.abs(M @ sol - rhs).max())
    ok = residual <= 1e-6 * max(1.0, float(np.abs(rhs).max()))
    if not ok:
        warnings.warn(
            f"Fisher-information solve residual {residual:.2e}; "
            "reporting the displacement part only (lower bound)")
        i_cov = 0.0
    else:
        Phi = sol.reshape(n2, n2, order="F")
        Phi = (Phi + Phi.T) / 2.0
        i_cov = float(0.5 * np.trace(Phi @ dcov))
    return i_mu + i_cov, i_mu, i_cov, ok


def qfi(config, t, eps0=0.0, mode="same", step=None):
    return qfi_parts(config, t, eps0=eps0, mode=mode, step=step)[0]


def qcrb(config, t, **kwargs):
    """Best possible sensitivity 1/sqrt(QFI)."""
    value = qfi(config, t, **kwargs)
    return float(1.0 / np.sqrt(value)) if value > 0 else np.inf


def sql(n_total, t):
    """Standard quantum limit 1/sqrt(N t)."""
    if n_total <= 0 or t <= 0:
        raise ConfigurationError("SQL needs positive excitation number and time")
    return float(1.0 / np.sqrt(n_total * t))


def peak_total_excitation(config, t, samples=256):
    """Peak total excitation over [0, t], sampled on a fixed uniform grid
    (the documented N convention for SQL comparisons)."""
    times = np.linspace(0.0, t, samples + 1)[1:]
    state0 = coherent_init(config)
    if config.lossless:
        peak = total_excitation(state0)
        for ti in times:
            peak = max(peak, total_excitation(evolve(state0, propagator(config, ti))))
        return peak
    states = evolve_lossy_trace(state0, config, times, rtol=1e-8)
    return max(total_excitation(state0), max(total_excitation(s) for s in states))


def db_ratio(reference, value):
    """Sensitivity comparison in decibel: 20 log10(reference/value)
    (the power ratio of the corresponding variances)."""
    return float(20.0 * np.log10(reference / value))


def sensitivity(config, obs, t, mode="same", eta=None, fd_step=1e-9,
                with_qfi=True, sql_samples=256):
    """Full working-point report: susceptibility, noise, delta_eps =
    sqrt(noise)/susceptibility, Fisher bound, and SQL comparison."""
    s = susceptibility(config, obs, t, method="fd", mode=mode, step=fd_step, eta=eta)
    nz = noise_variance(config, obs, t, eta=eta)
    delta = float(np.sqrt(nz) / s) if s > 0 else np.inf
    if with_qfi:
        value, _, _, _ = qfi_parts(config, t, mode=mode)
        bound = float(1.0 / np.sqrt(value)) if value > 0 else np.inf
    else:
        value, bound = np.nan, np.nan
    if sql_samples > 0 and t > 0:
        n_peak = peak_total_excitation(config, t, samples=sql_samples)
        sql_value = sql(n_peak, t) if n_peak > 0 else np.nan
    else:
        n_peak, sql_value = np.nan, np.nan
    try:
        chi = collective_rate(config.with_perturbation(0.0))
    except (ConfigurationError, RegimeError):
        chi = np.nan
    regime = bool(np.isnan(chi)) or fd_step < 0.1 * chi ** 3
    return SensitivityReport(
        g=config.g[0], kappa=config.kappa[0] if config.kappa else np.nan,
        alpha=abs(config.alpha[0]), gamma=config.gamma, Gamma=config.Gamma,
        eta=1.0 if eta is None else float(eta), t=float(t), chi=float(chi),
        observable=obs.name, susceptibility=float(s), noise_var=float(nz),
        delta_eps=delta, qfi=float(value), qcrb=bound,
        sql=sql_value, valid_regime=bool(regime), n_peak=float(n_peak))


# ---------------------------------------------------------------------------
# scaling studies

def _log_fit(chis, values):
    lx, ly = np.log(chis), np.log(values)
    slope, intercept = np.polyfit(lx, ly, 1)
    fitted = slope * lx + intercept
    ss_res = float(((ly - fitted) ** 2).sum())
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    return float(slope), float(intercept), 1.0 - ss_res / ss_tot if ss_tot else 1.0


def _check_chi_grid(chi_grid):
    chi_grid = np.asarray(chi_grid, dtype=float)
    if len(chi_grid) < 5 or np.any(chi_grid <= 0):
        raise ConfigurationError("chi grid needs >= 5 positive points")
    if chi_grid.max() / chi_grid.min() < 9.0:
        raise ConfigurationError("chi grid should span about a decade or more")
    return chi_grid


def scaling_fit(family, chi_grid, alpha=2.0, q=1, f=0.2):
    """Exponent of delta_eps versus chi at working points t = 2 q pi / chi.

    family "ep3": three-mode sensor swept along g = sqrt(1 - chi^2), X1-X2
    measurement. family "ep2": two-mode reference (g = 1,
    delta = sqrt(1 + chi^2)), optimal magnon quadrature. family "ep4":
    exploratory; the coupling g1 is pulled off the fourth-order locus, the
    eigenvalue spread sets the effective chi and the working time, and
    delta_eps = sqrt((n-1)/2)/|dmu/deps| on the magnon quadratures
    (vacuum-level-noise convention of the general 2n-1 scaling law; the
    approach path is weakly non-oscillatory, so exp growth enters only as a
    constant factor). Dynamically unusable grid points (overflow, vanishing
    response) are excluded and reported.
    """
    chi_grid = _check_chi_grid(chi_grid)
    points, excluded = [], []
    for chi in chi_grid:
        try:
            if family == "ep3":
                points.append((chi, _ep3_point(chi, alpha, q)))
            elif family == "ep2":
                points.append((chi, _ep2_point(chi, alpha, q)))
            elif family == "ep4":
                points.append(_ep4_point(chi, alpha, q, f))
            else:
                raise ConfigurationError(f"unknown scaling family {family!r}")
        except (FloatingPointError, OverflowError, np.linalg.LinAlgError) as exc:
            warnings.warn(f"excluding chi={chi:g}: {exc}")
            excluded.append(float(chi))
    chis = np.array([p[0] for p in points])
    values = np.array([p[1] for p in points])
    good = np.isfinite(values) & (values > 0)
    if not np.all(good):
        excluded.extend(chis[~good].tolist())
        warnings.warn(f"excluding {np.count_nonzero(~good)} non-finite points")
        chis, values = chis[good], values[good]
    slope, intercept, r2 = _log_fit(chis, values)
    return ScalingFit(exponent=slope, intercept=intercept, r_squared=r2,
                      chis=chis, values=values, excluded=tuple(excluded))


def _ep3_point(chi, alpha, q):
    g = float(np.sqrt(1.0 - chi * chi))
    config = ep3_sensor(g, alpha=alpha)
    t = 2.0 * np.pi * q / chi
    obs = x_minus()
    s = susceptibility(config, obs, t, method="fd")
    nz = noise_variance(config, obs, t)
    return float(np.sqrt(nz) / s)


def _ep2_point(chi, alpha, q, step=1e-10):
    delta = float(np.sqrt(1.0 + chi * chi))
    t = 2.0 * np.pi * q / chi
    ap, _ = two_mode_squeezer_coefficients(delta, 1.0, step, t)
    am, _ = two_mode_squeezer_coefficients(delta, 1.0, -step, t)
    slope = np.sqrt(2.0) * alpha * abs(ap.imag - am.imag) / (2.0 * step)
    return float(np.sqrt(0.5) / slope)


def _ep4_point(chi_target, alpha, q, f, step=1e-9):
    locus = ep4_locus(f)
    s_off = chi_target ** 4
    base = ep4_system(f, g1=locus.g - s_off, alpha=alpha)
    spec = eigensolve(base)
    lam = spec.eigenvalues
    chi_eff = float(np.sqrt(np.mean(np.abs(lam - lam.mean()) ** 2)))
    if chi_eff <= 0:
        raise ConfigurationError("degenerate spectrum: no oscillation scale")
    t = 2.0 * np.pi * q / chi_eff
    mu0 = coherent_init(base).mu

    def mu_at(e):
        return propagator(base.with_perturbation(e, "same"), t).S_quad @ mu0

    dmu = (mu_at(step) - mu_at(-step)) / (2.0 * step)
    response = float(np.linalg.norm(dmu[: 2 * (base.n - 1)]))
    return chi_eff, float(np.sqrt((base.n - 1) / 2.0) / response)


def qfi_chi_scaling(chi_grid, alpha=2.0, q=1):
    """Exponent of the Fisher information versus chi at t = 2 q pi / chi
    for the three-mode sensor family."""
    chi_grid = _check_chi_grid(chi_grid)
    values = []
    for chi in chi_grid:
        g = float(np.sqrt(1.0 - chi * chi))
        config = ep3_sensor(g, alpha=alpha)
        values.append(qfi(config, 2.0 * np.pi * q / chi))
    slope, intercept, r2 = _log_fit(chi_grid, np.asarray(values))
    return ScalingFit(exponent=slope, intercept=intercept, r_squared=r2,
                      chis=np.asarray(chi_grid), values=np.asarray(values))


# ---------------------------------------------------------------------------
# physical-units spot check

UNIT_CONVENTION = (
    "frequencies in Hz are rad/s over 2*pi: eps[Hz] = eps[kappa units] * kappa[Hz]; "
    "times in seconds are t[kappa units] / (2*pi*kappa[Hz]); the quoted figure is "
    "delta_eps[Hz] * sqrt(t[s]) in Hz/sqrt(Hz)")


def feasibility_check(g_ratio=0.995, alpha=100.0, kappa_hz=5.0e5, q=1):
    """Sensitivity of the sensor at an experimentally motivated operating
    point, converted to physical units under the documented convention."""
    config = ep3_sensor(g_ratio, alpha=alpha)
    chi = collective_rate(config)
    t = 2.0 * np.pi * q / chi
    obs = x_minus()
    s = susceptibility(config, obs, t, method="fd")
    nz = noise_variance(config, obs, t)
    delta = float(np.sqrt(nz) / s)
    kappa_rad = 2.0 * np.pi * kappa_hz
    delta_hz = delta * kappa_hz
    t_seconds = t / kappa_rad
    return {
        "g_over_kappa": g_ratio,
        "alpha": alpha,
        "kappa_hz": kappa_hz,
        "chi_dimensionless": chi,
        "t_dimensionless": t,
        "delta_eps_dimensionless": delta,
        "delta_eps_hz": delta_hz,
        "t_seconds": t_seconds,
        "sensitivity_hz_per_rt_hz": delta_hz * np.sqrt(t_seconds),
        "convention": UNIT_CONVENTION,
    }
