"""FitzHugh-Nagumo excitable medium on [0, L], method of lines.

    eps * v_t = eps^2 * v_xx + f(v) - w + c,   f(v) = v (v - 0.1)(1 - v)
        w_t   = b * v - gamma * w + c

with zero initial data, Neumann boundaries ``v_x(0, t) = -i0(t)``,
``v_x(L, t) = 0``, and input current ``i0(t) = i0_amp * t^3 * exp(-i0_rate t)``.
Second-order central differences; the boundary conditions enter through
ghost nodes (``v_{-1} = v_1 + 2 dx i0(t)`` on the left). The state is
``[v; w]`` and the outputs are the two fields at the left boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse

from .base import OdeSystem


@dataclass(frozen=True)
class FhnConfig:
    epsilon: float
    n_x: int = 256
    L: float = 20.0
    b: float = 0.5
    c: float = 0.05
    gamma: float = 2.0
    i0_amp: float = 50000.0
    i0_rate: float = 15.0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.n_x < 3:
            raise ValueError("n_x must be at least 3")
        if self.L <= 0:
            raise ValueError("L must be positive")


def fhn_input(t, config):
    """Boundary input current i0(t)."""
    return config.i0_amp * t**3 * np.exp(-config.i0_rate * t)


def cubic_nonlinearity(v):
    return v * (v - 0.1) * (1.0 - v)


def fhn_build(config):
    """Assemble the discretized FitzHugh-Nagumo system."""
    n_x = config.n_x
    dx = config.L / (n_x - 1)
    eps = config.epsilon

    # 1-D Laplacian with homogeneous Neumann closures; the inhomogeneous
    # left-flux term is added separately in the rhs.
    main = np.full(n_x, -2.0)
    off = np.ones(n_x - 1)
    lap = sparse.diags([off, main, off], [-1, 0, 1], format="lil")
    lap[0, 1] = 2.0
    lap[-1, -2] = 2.0
    lap = (lap / dx**2).tocsr()

    identity = sparse.identity(n_x, format="csr")

    def rhs(t, u):
        v, w = u[:n_x], u[n_x:]
        dv = eps * (lap @ v) + (cubic_nonlinearity(v) - w + config.c) / eps
        dv[0] += eps * 2.0 * fhn_input(t, config) / dx
        dw = config.b * v - config.gamma * w + config.c
        return np.concatenate([dv, dw])

    def jacobian(t, u):
        v = u[:n_x]
        fprime = -3.0 * v**2 + 2.2 * v - 0.1
        dv_dv = eps * lap + sparse.diags(fprime / eps)
        dv_dw = -identity / eps
        dw_dv = config.b * identity
        dw_dw = -config.gamma * identity
        return sparse.bmat([[dv_dv, dv_dw], [dw_dv, dw_dw]], format="csc")

    def output_map(u, t):
        return np.array([u[0], u[n_x]])

    return OdeSystem(
        dimension=2 * n_x,
        rhs=rhs,
        output_map=output_map,
        initial_state=np.zeros(2 * n_x),
        jacobian=jacobian,
        stiff=True,
        n_outputs=2,
        name="fhn",
    )


def fhn_uniform_equilibrium(config):
    """Spatially uniform rest state: roots of the coupled algebraic system
    ``f(v) - w + c = 0``, ``b v - gamma w + c = 0`` found by a scalar
    root-find after eliminating w."""
    from scipy.optimize import brentq

    def residual(v):
        w = (config.b * v + config.c) / config.gamma
        return cubic_nonlinearity(v) - w + config.c

    # Bracket the smallest root; with the paper constants it sits near 0.1.
    grid = np.linspace(-1.0, 2.0, 2001)
    vals = residual(grid)
    for lo, hi, f_lo, f_hi in zip(grid, grid[1:], vals, vals[1:]):
        if f_lo == 0.0:
            v_star = lo
            break
        if f_lo * f_hi < 0:
            v_star = brentq(residual, lo, hi, xtol=1e-14)
            break
    else:
        raise RuntimeError("no uniform equilibrium found in [-1, 2]")
    w_star = (config.b * v_star + config.c) / config.gamma
    return v_star, w_star
