"""Gaussian-state dynamics: symplectic propagators, lossy moment evolution,
passive channels, and the two-mode passive-squeeze-passive decomposition.

Quadrature convention: X = (b + b^+)/sqrt(2), P = (b - b^+)/(i sqrt(2)),
so a vacuum or coherent state has covariance I/2 and var(X1 - X2) = 1.
State vectors are ordered (X1, P1, ..., Xn, Pn) with the cavity last.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import expm

from .config import (ConfigurationError, NumericalError, RegimeError,
                     collective_rate)
from .model import build_system, reduced_mode_kinds
from .spectral import eigensolve

_T2 = np.array([[1.0, 1.0], [-1j, 1j]]) / np.sqrt(2.0)


def symplectic_form(n_modes):
    """Omega = I_n (x) [[0, 1], [-1, 0]]."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class GaussianState:
    """First moments mu (length 2n) and covariance cov (2n x 2n)."""

    mu: np.ndarray
    cov: np.ndarray
    modes: tuple
    time: float = 0.0

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "cov", cov)
        if mu.shape != (2 * len(self.modes),) or cov.shape != (len(mu), len(mu)):
            raise ConfigurationError("state dimensions do not match mode labels")

    @property
    def n_modes(self):
        return len(self.modes)

    def marginal(self, indices):
        """Reduced state of the selected modes (order preserved)."""
        sel = np.concatenate([[2 * i, 2 * i + 1] for i in indices]).astype(int)
        return GaussianState(mu=self.mu[sel], cov=self.cov[np.ix_(sel, sel)],
                             modes=tuple(self.modes[i] for i in indices),
                             time=self.time)

    def purity_det(self):
        """det(2 cov); equals 1 for pure states."""
        return float(np.linalg.det(2.0 * self.cov))

    def uncertainty_min_eigenvalue(self):
        """Smallest eigenvalue of cov + i Omega/2 (>= 0 for physical states)."""
        om = symplectic_form(self.n_modes)
        M = self.cov + 0.5j * om
        return float(np.linalg.eigvalsh((M + M.conj().T) / 2.0).min())

    def to_json_dict(self):
        return {
            "n_modes": self.n_modes,
            "modes": list(self.modes),
            "time": self.time,
            "mu": self.mu.tolist(),
            "cov": self.cov.flatten().tolist(),   # row-major
        }

    @classmethod
    def from_json_dict(cls, d):
        n = int(d["n_modes"])
        return cls(mu=np.array(d["mu"], dtype=float),
                   cov=np.array(d["cov"], dtype=float).reshape(2 * n, 2 * n),
                   modes=tuple(d["modes"]), time=float(d["time"]))


@dataclass(frozen=True)
class Propagator:
    """Reduced-basis operator propagator K and the real quadrature map S_quad."""

    K: np.ndarray
    S_quad: np.ndarray
    t: float
    method: str                  # "eigen" or "expm"
    condition_number: float

    def symplectic_residual(self):
        n = self.S_quad.shape[0] // 2
        om = symplectic_form(n)
        return float(np.abs(self.S_quad @ om @ self.S_quad.T - om).max())


@dataclass(frozen=True)
class BlochMessiahDecomposition:
    """Sigma = K_passive . diag(S(-r), S(r)) . L_passive with
    S(r) = diag(e^-r, e^r); xbar is the output displacement."""

    phi: float
    r: float
    K_passive: np.ndarray
    L_passive: np.ndarray
    xbar: np.ndarray

    def squeeze_stage(self):
        return np.diag([np.exp(self.r), np.exp(-self.r),
                        np.exp(-self.r), np.exp(self.r)])

    def reconstruct(self):
        return self.K_passive @ self.squeeze_stage() @ self.L_passive


def vacuum_state(n_modes, modes=None, time=0.0):
    modes = tuple(modes) if modes else tuple(f"m{i + 1}" for i in range(n_modes))
    return GaussianState(mu=np.zeros(2 * n_modes), cov=np.eye(2 * n_modes) / 2.0,
                         modes=modes, time=time)


def coherent_init(config):
    """Magnon modes in coherent states alpha_i, cavity in vacuum."""
    n = config.n
    mu = np.zeros(2 * n)
    for i, a in enumerate(config.alpha):
        mu[2 * i] = np.sqrt(2.0) * a.real
        mu[2 * i + 1] = np.sqrt(2.0) * a.imag
    modes = tuple(f"b{i + 1}" for i in range(n - 1)) + ("a",)
    return GaussianState(mu=mu, cov=np.eye(2 * n) / 2.0, modes=modes)


def _lift_to_full(K, kinds):
    """Expand the reduced operator map to the interleaved (c, c^+) basis by
    conjugation symmetry."""
    n = len(kinds)
    Kf = np.zeros((2 * n, 2 * n), dtype=complex)
    for p, (mp, dag_p) in enumerate(kinds):
        for q, (mq, dag_q) in enumerate(kinds):
            ip = 2 * mp + (1 if dag_p else 0)
            iq = 2 * mq + (1 if dag_q else 0)
            Kf[ip, iq] = K[p, q]
            Kf[ip ^ 1, iq ^ 1] = np.conj(K[p, q])
    return Kf


def operator_to_quadrature(K, kinds):
    """Real quadrature map equivalent to a reduced-basis operator map."""
    n = len(kinds)
    T = np.kron(np.eye(n), _T2)
    S = T @ _lift_to_full(K, kinds) @ T.conj().T
    imag = float(np.abs(S.imag).max())
    scale = max(1.0, float(np.abs(S.real).max()))
    if imag > 1e-8 * scale:
        raise NumericalError(f"quadrature map not real: imaginary residual {imag:.3e}")
    return S.real


COND_SWITCH = 1e8


def propagator(config, t, method="auto"):
    """Reduced propagator K(t) = exp(-i h t) and its quadrature map.

    Uses the eigen-decomposition when the eigenvector matrix is well enough
    conditioned and falls back to scaling-and-squaring expm near exceptional
    points, where the eigenbasis is defective.
    """
    h = build_system(config).reduced
    kinds = reduced_mode_kinds(config)
    cond = np.inf
    used = "expm"
    K = None
    if method in ("auto", "eigen"):
        spec = eigensolve(config)
        V = spec.right_vectors
        cond = float(np.linalg.cond(V))
        if method == "eigen" or cond < COND_SWITCH:
            phases = np.exp(-1j * spec.eigenvalues * t)
            K = V @ np.diag(phases) @ np.linalg.inv(V)
            used = "eigen"
    if K is None or method == "expm":
        K = expm(-1j * h * t)
        used = "expm"
    return Propagator(K=K, S_quad=operator_to_quadrature(K, kinds), t=float(t),
                      method=used, condition_number=cond)


def evolve(state, prop):
    """Affine symplectic update mu -> S mu, cov -> S cov S^T."""
    S = prop.S_quad if isinstance(prop, Propagator) else np.asarray(prop)
    if S.shape != (len(state.mu), len(state.mu)):
        raise ConfigurationError(
            f"propagator dimension {S.shape} does not match state ({len(state.mu)})")
    t = state.time + (prop.t if isinstance(prop, Propagator) else 0.0)
    return replace(state, mu=S @ state.mu, cov=S @ state.cov @ S.T, time=t)


# ---------------------------------------------------------------------------
# lossy moment evolution

def drift_and_diffusion(config):
    """Quadrature drift A (incl. decay) and the vacuum-input diffusion D.

    D is fixed by the requirement that a decoupled decaying mode with
    vacuum input keeps cov = I/2 exactly, which pins D = rate * I per mode
    pair and removes any noise-normalization ambiguity.
    """
    h = build_system(config).reduced
    kinds = reduced_mode_kinds(config)
    n = config.n
    T = np.kron(np.eye(n), _T2)
    G = T @ _lift_to_full(-1j * h, kinds) @ T.conj().T
    if np.abs(G.imag).max() > 1e-12 * max(1.0, np.abs(G.real).max()):
        raise NumericalError("drift matrix is not real")
    rates = [config.Gamma] * (n - 1) + [config.gamma]
    D = np.kron(np.diag(rates), np.eye(2))
    return G.real, D


def _rk4_pass(mu, cov, A, D, t, steps):
    h = t / steps
    for _ in range(steps):
        k1m = A @ mu
        k1c = A @ cov + cov @ A.T + D
        m2, c2 = mu + 0.5 * h * k1m, cov + 0.5 * h * k1c
        k2m = A @ m2
        k2c = A @ c2 + c2 @ A.T + D
        m3, c3 = mu + 0.5 * h * k2m, cov + 0.5 * h * k2c
        k3m = A @ m3
        k3c = A @ c3 + c3 @ A.T + D
        m4, c4 = mu + h * k3m, cov + h * k3c
        k4m = A @ m4
        k4c = A @ c4 + c4 @ A.T + D
        mu = mu + h / 6.0 * (k1m + 2 * k2m + 2 * k3m + k4m)
        cov = cov + h / 6.0 * (k1c + 2 * k2c + 2 * k3c + k4c)
    return mu, cov


def _base_steps(config, t):
    try:
        period = 2.0 * np.pi / collective_rate(config)
    except (ConfigurationError, RegimeError):
        h = build_system(config).reduced
        period = 2.0 * np.pi / max(float(np.abs(h).max()), 1e-6)
    h0 = min(period, 1.0 / max(config.gamma, config.Gamma, 1.0)) / 200.0
    return max(int(np.ceil(abs(t) / h0)), 8)


def evolve_lossy(state, config, t, rtol=1e-9, max_halvings=8):
    """Integrate d(mu)/dt = A mu, d(cov)/dt = A cov + cov A^T + D with
    fixed-step RK4, halving the step until two successive passes agree to
    rtol (Richardson-style convergence check).
    """
    if t == 0:
        return state
    A, D = drift_and_diffusion(config)
    steps = _base_steps(config, t)
    mu, cov = _rk4_pass(state.mu, state.cov, A, D, t, steps)
    scale = max(1.0, float(np.abs(cov).max()), float(np.abs(mu).max()))
    for _ in range(max_halvings):
        steps *= 2
        mu2, cov2 = _rk4_pass(state.mu, state.cov, A, D, t, steps)
        err = max(np.abs(mu2 - mu).max(), np.abs(cov2 - cov).max())
        mu, cov = mu2, cov2
        scale = max(1.0, float(np.abs(cov).max()), float(np.abs(mu).max()))
        if err < rtol * scale:
            return replace(state, mu=mu, cov=cov, time=state.time + t)
    raise NumericalError(
        f"lossy integrator did not converge: {steps} steps, residual {err:.3e}, "
        f"target {rtol * scale:.3e}")


def evolve_lossy_trace(state, config, times, rtol=1e-9):
    """States at an increasing sequence of times, one integration per leg."""
    out = []
    current = state
    prev_t = 0.0
    for t in times:
        if t < prev_t:
            raise ConfigurationError("trace times must be non-decreasing")
        current = evolve_lossy(current, config, t - prev_t, rtol=rtol)
        out.append(current)
        prev_t = t
    return out


# ---------------------------------------------------------------------------
# observables on states

def excitation_numbers(state):
    """Per-mode occupation (mu_X^2 + mu_P^2)/2 + (cov_XX + cov_PP - 1)/2."""
    n = state.n_modes
    out = np.empty(n)
    for i in range(n):
        x, p = 2 * i, 2 * i + 1
        out[i] = (state.mu[x] ** 2 + state.mu[p] ** 2) / 2.0 \
            + (state.cov[x, x] + state.cov[p, p] - 1.0) / 2.0
    return out


def total_excitation(state):
    return float(excitation_numbers(state).sum())


# ---------------------------------------------------------------------------
# channels

def readout_swap(state, theta_t, modes=None):
    """Append vacuum read-out modes and rotate each selected mode into its
    read-out partner by the angle theta_t (beam-splitter map
    b -> cos(theta_t) b - sin(theta_t) d, d -> sin(theta_t) b + cos(theta_t) d).
    At theta_t = pi/2 the selected-mode and read-out marginals swap exactly.

    By default all modes except the last (the cavity) are read out.
    """
    n = state.n_modes
    if modes is None:
        modes = tuple(range(n - 1))
    k = len(modes)
    big_mu = np.concatenate([state.mu, np.zeros(2 * k)])
    big_cov = np.block([
        [state.cov, np.zeros((2 * n, 2 * k))],
        [np.zeros((2 * k, 2 * n)), np.eye(2 * k) / 2.0]])
    S = np.eye(2 * (n + k))
    c, s = np.cos(theta_t), np.sin(theta_t)
    for j, mode in enumerate(modes):
        b, d = 2 * mode, 2 * (n + j)
        for off in (0, 1):
            S[b + off, b + off] = c
            S[b + off, d + off] = -s
            S[d + off, b + off] = s
            S[d + off, d + off] = c
    labels = state.modes + tuple(f"d{state.modes[m]}" for m in modes)
    return GaussianState(mu=S @ big_mu, cov=S @ big_cov @ S.T, modes=labels,
                         time=state.time)


def apply_external_loss(state, eta):
    """Beam-splitter loss: per mode, mu -> sqrt(eta) mu and the covariance
    block -> eta*block + (1-eta)/2 * I. eta may be a scalar or per-mode."""
    n = state.n_modes
    eta = np.broadcast_to(np.asarray(eta, dtype=float), (n,))
    if np.any(eta < 0) or np.any(eta > 1):
        raise ConfigurationError("transmissivities must lie in [0, 1]")
    X = np.kron(np.diag(np.sqrt(eta)), np.eye(2))
    cov = X @ state.cov @ X + (np.eye(2 * n) - X @ X) / 2.0
    return replace(state, mu=X @ state.mu, cov=cov)


# ---------------------------------------------------------------------------
# two-mode reference model and its decomposition

def two_mode_squeezer_coefficients(delta, g, eps, t):
    """Propagation pair (A, B) of the two-mode reference system
    (one squeezing-coupled pair with common detuning delta + eps):
    A = cos(chi t) - i (delta+eps) sin(chi t)/chi, B = g sin(chi t)/chi,
    chi = sqrt((delta+eps)^2 - g^2), continued through chi^2 <= 0.
    Satisfies |A|^2 - |B|^2 = 1; B is real."""
    dp = delta + eps
    chi = np.sqrt(complex(dp * dp - g * g))
    if abs(chi) < 1e-150:
        A, B = 1.0 - 1j * dp * t, g * t
    else:
        A = np.cos(chi * t) - 1j * dp * np.sin(chi * t) / chi
        B = g * np.sin(chi * t) / chi
    return complex(A), complex(B)


def two_mode_quadrature_map(A, B):
    """Quadrature map of the pair map a -> A a + B b^+, b -> A b + B a^+
    (mode order: cavity-like first, magnon-like second; B real)."""
    B = _real_B(B)
    ReA, ImA = A.real, A.imag
    return np.array([
        [ReA, -ImA, B, 0.0],
        [ImA, ReA, 0.0, -B],
        [B, 0.0, ReA, -ImA],
        [0.0, -B, ImA, ReA]])


def _real_B(B):
    B = complex(B)
    if abs(B.imag) > 1e-9 * max(1.0, abs(B)):
        raise ConfigurationError(f"expected a real squeezing coefficient, got {B!r}")
    return B.real


def _rot(phi):
    return np.array([[np.cos(phi), np.sin(phi)], [-np.sin(phi), np.cos(phi)]])


def bloch_messiah_2mode(A, B, alpha, tol=1e-9):
    """Passive-squeeze-passive factorization of the two-mode propagator.

    For |A|^2 - |B|^2 = 1 (checked to tol) the quadrature map of
    (a -> A a + B b^+, b -> A b + B a^+) factors exactly as
    K . diag(S(-r), S(r)) . L with 50:50-splitter passive stages

        K = [[I, -I], [R(phi), R(phi)]] / sqrt(2)
        L = [[R(phi), I], [-R(phi), I]] / sqrt(2)

    where phi = -arg(A) and r = arcsinh(B) (so |r| = ln(|A| + |B|)); the
    displacement created from an initial magnon amplitude alpha is
    xbar = sqrt(2) alpha [Re B, Im B, Re A, Im A].
    """
    A = complex(A)
    Br = _real_B(B)
    defect = abs(abs(A) ** 2 - Br * Br - 1.0)
    if defect > tol:
        raise ConfigurationError(
            f"|A|^2 - |B|^2 = 1 violated by {defect:.3e} (tol {tol:g})")
    phi = -np.arctan2(A.imag, A.real)
    r = float(np.arcsinh(Br))
    I2 = np.eye(2)
    K = np.block([[I2, -I2], [_rot(phi), _rot(phi)]]) / np.sqrt(2.0)
    L = np.block([[_rot(phi), I2], [-_rot(phi), I2]]) / np.sqrt(2.0)
    xbar = np.sqrt(2.0) * alpha * np.array([Br, 0.0, A.real, A.imag])
    return BlochMessiahDecomposition(phi=float(phi), r=r, K_passive=K,
                                     L_passive=L, xbar=xbar)
