"""Fourier-mode simulation of the stochastic wave field on (0, pi).

The field solves  d^2u/dt^2 = lam d^2u/dx^2 + sigma dW/dt  with Dirichlet
boundaries and zero initial data.  Its sine-series coefficients (u_k, v_k)
are independent stochastic oscillators driven by independent Brownian
motions w_k; everything here samples those oscillators on the uniform grid
t_i = i T / M and reassembles field slices from the truncated series

    u(t, x) = sqrt(2/pi) sum_k u_k(t) sin(k x).

Two samplers:

* ``simulate_euler``: the explicit scheme
      u_k(t_{i+1}) = u_k(t_i) + v_k(t_i) dt
      v_k(t_{i+1}) = v_k(t_i) - lam k^2 u_k(t_i) dt + sigma (w_k(t_{i+1}) - w_k(t_i)),
  storing the driving increments alongside the paths.

* ``simulate_exact``: the Gaussian transition of the linear oscillator,
  a rotation by ell dt plus centered noise with the exact step covariance
      Q_uu = sigma^2/ell^2 (dt/2 - sin(2 ell dt)/(4 ell))
      Q_uv = sigma^2 sin(ell dt)^2 / (2 ell^2)
      Q_vv = sigma^2 (dt/2 + sin(2 ell dt)/(4 ell)),
  so each marginal matches the continuous process in law at every grid time.
  It is the oracle sampler for the explicit scheme.

Per-mode noise streams are keyed by (base_seed, replication, mode); see rng.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError, SizingError
from .moments import _shape_det, _shape_uu
from .rng import mode_generator

SCHEMES = ("euler", "exact")

# Allocation guard: elements per (N, M+1) state array, about 1 GiB of float64.
MAX_STATE_ELEMENTS = 2 ** 27

_UINT64_MAX = 2 ** 64 - 1


@dataclass(frozen=True)
class SimConfig:
    """Physical and numerical parameters of one simulation.

    lam      -- wave-speed parameter (> 0)
    sigma    -- noise intensity (> 0)
    n_modes  -- number of Fourier modes N (>= 1)
    m_steps  -- number of time steps M (>= 1)
    t_final  -- time horizon T (> 0)
    scheme   -- "euler" or "exact"
    base_seed -- 64-bit stream seed
    """

    lam: float
    sigma: float
    n_modes: int
    m_steps: int
    t_final: float
    scheme: str = "euler"
    base_seed: int = 0

    def __post_init__(self) -> None:
        if not (isinstance(self.lam, (int, float)) and math.isfinite(self.lam) and self.lam > 0):
            raise ConfigError(f"lambda must be finite and > 0, got {self.lam!r}")
        if not (isinstance(self.sigma, (int, float)) and math.isfinite(self.sigma) and self.sigma > 0):
            raise ConfigError(f"sigma must be finite and > 0, got {self.sigma!r}")
        if not (isinstance(self.n_modes, int) and self.n_modes >= 1):
            raise ConfigError(f"n_modes must be an integer >= 1, got {self.n_modes!r}")
        if not (isinstance(self.m_steps, int) and self.m_steps >= 1):
            raise ConfigError(f"m_steps must be an integer >= 1, got {self.m_steps!r}")
        if not (isinstance(self.t_final, (int, float)) and math.isfinite(self.t_final) and self.t_final > 0):
            raise ConfigError(f"t_final must be finite and > 0, got {self.t_final!r}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if not (isinstance(self.base_seed, int) and 0 <= self.base_seed <= _UINT64_MAX):
            raise ConfigError(f"base_seed must be an unsigned 64-bit integer, got {self.base_seed!r}")
        dt = self.t_final / self.m_steps
        if not (math.isfinite(dt) and dt > 0.0):
            raise ConfigError(f"step size t_final/m_steps must be positive and finite, got {dt!r}")
        if self.n_modes * (self.m_steps + 1) > MAX_STATE_ELEMENTS:
            raise SizingError(
                f"state of {self.n_modes} x {self.m_steps + 1} exceeds the "
                f"{MAX_STATE_ELEMENTS}-element allocation guard"
            )

    @property
    def dt(self) -> float:
        return self.t_final / self.m_steps

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "sigma": self.sigma,
            "n_modes": self.n_modes,
            "m_steps": self.m_steps,
            "t_final": self.t_final,
            "scheme": self.scheme,
            "base_seed": self.base_seed,
        }

    @classmethod
    def from_dict(cls, doc: dict, **overrides) -> "SimConfig":
        """Build from a JSON-style document; extra keys are ignored.

        The physical parameters have no defaults and must be present.
        """
        if not isinstance(doc, dict):
            raise ConfigError(f"config document must be a JSON object, got {type(doc).__name__}")
        kwargs = {}
        for ext_name, attr, caster in (
            ("lambda", "lam", float),
            ("sigma", "sigma", float),
            ("n_modes", "n_modes", int),
            ("m_steps", "m_steps", int),
            ("t_final", "t_final", float),
        ):
            if attr in overrides:
                kwargs[attr] = overrides[attr]
                continue
            if ext_name not in doc:
                raise ConfigError(f"missing required config field {ext_name!r}")
            raw = doc[ext_name]
            if isinstance(raw, bool) or (caster is int and not isinstance(raw, int)):
                raise ConfigError(f"config field {ext_name!r} must be an integer, got {raw!r}")
            try:
                kwargs[attr] = caster(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"config field {ext_name!r} is not a number: {raw!r}") from exc
        kwargs["scheme"] = overrides.get("scheme", doc.get("scheme", "euler"))
        if "base_seed" in overrides:
            kwargs["base_seed"] = overrides["base_seed"]
        elif "base_seed" in doc:
            raw = doc["base_seed"]
            if isinstance(raw, bool) or not isinstance(raw, int):
                raise ConfigError(f"config field 'base_seed' must be an integer, got {raw!r}")
            kwargs["base_seed"] = raw
        return cls(**kwargs)


@dataclass(frozen=True)
class TrajectorySet:
    """Sampled mode paths on the uniform grid.

    grid -- (M+1,) times t_i = i T / M
    u, v -- (N, M+1) displacements and velocities, row k-1 is mode k
    dw   -- (N, M) driving Brownian increments, or None for exact-scheme data
    """

    config: SimConfig
    grid: np.ndarray
    u: np.ndarray
    v: np.ndarray
    dw: np.ndarray | None = None


@dataclass(frozen=True)
class FieldSlice:
    """Truncated sine series of the field and its velocity at one grid time."""

    t: float
    x_grid: np.ndarray
    values_u: np.ndarray
    values_v: np.ndarray


def transition_cov(ell: float, sigma: float, dt: float) -> tuple[float, float, float]:
    """Exact covariance (Q_uu, Q_uv, Q_vv) of one step of length dt.

    Q_uu = sigma^2 dt^3 * shape_uu(theta), Q_uv = sigma^2 dt^2 sinc(theta)^2/2,
    Q_vv = sigma^2 dt (1/2 + sin(2 theta)/(4 theta)) with theta = ell dt; the
    shape helpers switch to series below |theta| = 0.5 (see moments).
    """
    if not (math.isfinite(ell) and ell > 0):
        raise ValueError(f"ell must be finite and > 0, got {ell!r}")
    if not (math.isfinite(sigma) and sigma > 0):
        raise ValueError(f"sigma must be finite and > 0, got {sigma!r}")
    if not (math.isfinite(dt) and dt >= 0):
        raise ValueError(f"dt must be finite and >= 0, got {dt!r}")
    if dt == 0.0:
        return 0.0, 0.0, 0.0
    theta = ell * dt
    sig2 = sigma * sigma
    sinc = math.sin(theta) / theta
    q_uu = sig2 * dt ** 3 * _shape_uu(theta)
    q_uv = 0.5 * sig2 * dt * dt * sinc * sinc
    q_vv = sig2 * dt * (0.5 + math.sin(2.0 * theta) / (4.0 * theta))
    return q_uu, q_uv, q_vv


def transition_chol(ell: float, sigma: float, dt: float) -> tuple[float, float, float]:
    """Lower Cholesky factor (l11, l21, l22) of the step covariance.

    det Q = sigma^4 dt^4 shape_det(theta) / 4 in closed form, so l22 needs no
    subtraction; a dt of zero yields the zero factor (degenerate step).
    """
    q_uu, q_uv, _ = transition_cov(ell, sigma, dt)
    if dt == 0.0:
        return 0.0, 0.0, 0.0
    theta = ell * dt
    det_q = 0.25 * sigma ** 4 * dt ** 4 * _shape_det(theta)
    l11 = math.sqrt(q_uu)
    l21 = q_uv / l11
    l22 = math.sqrt(det_q) / l11
    return l11, l21, l22


def _transition_chol3(ell: float, sigma: float, dt: float) -> tuple[float, float, float, float, float, float]:
    """Cholesky factor of the joint (state-noise, increment) covariance.

    Cross terms: Cov(n_u, dW) = 2 sigma sin(theta/2)^2 / ell^2 and
    Cov(n_v, dW) = sigma sin(theta)/ell, Var(dW) = dt.  The final pivot is
    clamped at zero; its relative rounding error (at worst ~eps/theta^2 for
    tiny theta) only perturbs the conditional remainder of the increment.
    """
    l11, l21, l22 = transition_chol(ell, sigma, dt)
    if dt == 0.0:
        return 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    theta = ell * dt
    half = math.sin(0.5 * theta)
    c_uw = 2.0 * sigma * half * half / (ell * ell)
    c_vw = sigma * math.sin(theta) / ell
    l31 = c_uw / l11
    l32 = (c_vw - l31 * l21) / l22
    l33 = math.sqrt(max(dt - l31 * l31 - l32 * l32, 0.0))
    return l11, l21, l22, l31, l32, l33


def _state_arrays(config: SimConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n, m = config.n_modes, config.m_steps
    grid = np.linspace(0.0, config.t_final, m + 1)
    u = np.zeros((n, m + 1))
    v = np.zeros((n, m + 1))
    return grid, u, v


def _draw_normals(config: SimConfig, replication: int, per_step: int) -> np.ndarray:
    """(N, M, per_step) standard normals, one independent stream per mode."""
    n, m = config.n_modes, config.m_steps
    z = np.empty((n, m, per_step)) if per_step > 1 else np.empty((n, m))
    for k in range(1, n + 1):
        gen = mode_generator(config.base_seed, replication, k)
        if per_step > 1:
            z[k - 1] = gen.standard_normal((m, per_step))
        else:
            z[k - 1] = gen.standard_normal(m)
    return z


def simulate_euler(config: SimConfig, replication: int = 0, *,
                   increments: np.ndarray | None = None) -> TrajectorySet:
    """Sample all modes by the explicit scheme; stores the driving increments.

    ``increments`` overrides the Brownian increments w_k(t_i) - w_k(t_{i-1})
    with a given (N, M) array (testing seam; deterministic data injection).
    """
    if config.scheme != "euler":
        raise ConfigError(f"simulate_euler requires scheme='euler', got {config.scheme!r}")
    n, m = config.n_modes, config.m_steps
    dt = config.dt
    if increments is None:
        dw = _draw_normals(config, replication, 1)
        dw *= math.sqrt(dt)
    else:
        dw = np.asarray(increments, dtype=np.float64)
        if dw.shape != (n, m):
            raise ConfigError(f"increments must have shape {(n, m)}, got {dw.shape}")
        if not np.all(np.isfinite(dw)):
            raise ConfigError("increments must be finite")
        dw = dw.copy()
    grid, u, v = _state_arrays(config)
    k = np.arange(1, n + 1, dtype=np.float64)
    lam_k2 = config.lam * k * k
    _kernels.euler_paths(u, v, dw, lam_k2, config.sigma, dt)
    return TrajectorySet(config=config, grid=grid, u=u, v=v, dw=dw)


def simulate_exact(config: SimConfig, replication: int = 0, *,
                   include_increments: bool = False) -> TrajectorySet:
    """Sample all modes by the exact Gaussian transition.

    By default the driving increments are not observable and ``dw`` is None;
    with ``include_increments`` the per-step Brownian increment is sampled
    jointly with the state noise (three normals per step instead of two),
    which makes the increment-based diagnostics available on exact data.
    """
    if config.scheme != "exact":
        raise ConfigError(f"simulate_exact requires scheme='exact', got {config.scheme!r}")
    n, m = config.n_modes, config.m_steps
    dt = config.dt
    sig = config.sigma
    ells = [math.sqrt(config.lam) * k for k in range(1, n + 1)]
    thetas = [ell * dt for ell in ells]
    cos_t = np.array([math.cos(th) for th in thetas])
    sin_over_ell = np.array([math.sin(th) / ell for th, ell in zip(thetas, ells)])
    ell_sin = np.array([ell * math.sin(th) for th, ell in zip(thetas, ells)])
    grid, u, v = _state_arrays(config)
    if include_increments:
        chol = np.array([_transition_chol3(ell, sig, dt) for ell in ells])
        z = _draw_normals(config, replication, 3)
        dw = np.empty((n, m))
        _kernels.exact_paths_with_increments(u, v, dw, z, cos_t, sin_over_ell, ell_sin, chol)
        return TrajectorySet(config=config, grid=grid, u=u, v=v, dw=dw)
    factors = np.array([transition_chol(ell, sig, dt) for ell in ells])
    z = _draw_normals(config, replication, 2)
    _kernels.exact_paths(u, v, z, cos_t, sin_over_ell, ell_sin,
                         factors[:, 0].copy(), factors[:, 1].copy(), factors[:, 2].copy())
    return TrajectorySet(config=config, grid=grid, u=u, v=v, dw=None)


def simulate(config: SimConfig, replication: int = 0, *,
             include_increments: bool = False) -> TrajectorySet:
    """Dispatch on ``config.scheme``; euler data always carries increments."""
    if config.scheme == "euler":
        return simulate_euler(config, replication)
    return simulate_exact(config, replication, include_increments=include_increments)


def reconstruct_field(traj: TrajectorySet, t_index: int, x_grid) -> FieldSlice:
    """Truncated sine series of u and v at grid time ``t_index``.

    values_u[j] = sqrt(2/pi) sum_k u_k(t_i) sin(k x_j), likewise for v.
    Positions exactly at the boundary (x = 0 or x = pi) yield exact zeros,
    matching the Dirichlet condition rather than sin(k pi) rounding noise.
    """
    m = traj.config.m_steps
    if not (isinstance(t_index, int) and 0 <= t_index <= m):
        raise IndexError(f"t_index must be in [0, {m}], got {t_index!r}")
    x = np.asarray(x_grid, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("x_grid must be one-dimensional")
    if x.size and (x.min() < 0.0 or x.max() > math.pi):
        raise ValueError("x_grid values must lie in [0, pi]")
    n = traj.config.n_modes
    k = np.arange(1, n + 1, dtype=np.float64)
    basis = np.sin(np.outer(k, x))
    scale = math.sqrt(2.0 / math.pi)
    values_u = scale * (traj.u[:, t_index] @ basis)
    values_v = scale * (traj.v[:, t_index] @ basis)
    boundary = (x == 0.0) | (x == math.pi)
    values_u[boundary] = 0.0
    values_v[boundary] = 0.0
    return FieldSlice(t=float(traj.grid[t_index]), x_grid=x,
                      values_u=values_u, values_v=values_v)
