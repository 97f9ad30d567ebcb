"""Ferrocyanide redox kinetics coupled to diffusion at a rotating disc
electrode.

Each species (reduced/oxidized form) diffuses through its own Levich
boundary layer of thickness ``delta_i = 1.61 D_i^(1/3) nu^(1/6) omega^(-1/2)``
(omega in rad/s, converted from the rpm rotation rate):

    dc_i/dt = D_i d2c_i/dz2,          z in [0, delta_i]
    D_i dc_i/dz|_{z=0} = +- r(t)      (+ red consumed, - ox produced)
    c_i(delta_i, t) = c_i_inf

The electrode potential follows the charge balance
``C_dl dE/dt = J - F r`` with the potentiostatic closure
``J = (E_total(t) - E) / R_ohm`` (area-specific resistance) and
Butler-Volmer kinetics

    r = k { (c_red0/c_red_inf) exp(beta f (E - E_r))
          - (c_ox0/c_ox_inf) exp(-(1-beta) f (E - E_r)) },   f = F/(R T).

State layout: ``[c_red (n_z); c_ox (n_z); E]``; the Dirichlet nodes at
z = delta are carried as constant states. Output: the current density J.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse

from .base import OdeSystem

FARADAY = 96485.0        # C / mol
GAS_CONSTANT = 8.314     # J / (mol K)


@dataclass(frozen=True)
class EwaveConfig:
    """Applied potential E_total(t) = E_dc + E_ac * sin(2 pi freq t)."""

    E_dc: float = 0.25
    E_ac: float = 0.05
    frequency: float = 1.0


@dataclass(frozen=True)
class FerroConfig:
    w_d: float                      # rotation rate, rpm
    n_z: int = 201                  # grid nodes per species
    C_dl: float = 0.2               # F / m^2
    beta: float = 0.5
    k: float = 1e-3                 # rate constant (rate at unit ratios), mol m^-2 s^-1
    R_ohm: float = 1e-3             # area-specific ohmic resistance, Ohm m^2
    D_red: float = 6.7e-10          # m^2 / s
    D_ox: float = 7.6e-10           # m^2 / s
    c_red_inf: float = 10.0         # mol / m^3
    c_ox_inf: float = 10.0          # mol / m^3
    E_r: float = 0.25               # V
    nu: float = 1e-6                # m^2 / s
    temperature: float = 298.0      # K
    e_wave: EwaveConfig = EwaveConfig()

    def __post_init__(self):
        positive = {
            "C_dl": self.C_dl, "R_ohm": self.R_ohm,
            "D_red": self.D_red, "D_ox": self.D_ox, "c_red_inf": self.c_red_inf,
            "c_ox_inf": self.c_ox_inf, "nu": self.nu, "temperature": self.temperature,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if not 500.0 <= self.w_d <= 5000.0:
            raise ValueError("rotation rate w_d must lie in [500, 5000] rpm")
        if self.k < 0:
            raise ValueError("rate constant k must be >= 0")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if self.n_z < 3:
            raise ValueError("n_z must be at least 3")


def diffusion_layer_thickness(diffusivity, nu, w_d_rpm):
    """Levich boundary-layer thickness; the rpm rate is converted to rad/s."""
    if diffusivity <= 0 or nu <= 0 or w_d_rpm <= 0:
        raise ValueError("all arguments must be positive")
    omega = w_d_rpm * 2.0 * math.pi / 60.0
    return 1.61 * diffusivity ** (1.0 / 3.0) * nu ** (1.0 / 6.0) * omega ** -0.5


def butler_volmer_rate(E, c_red0, c_ox0, config):
    """Net reaction rate (mol m^-2 s^-1), positive when red is consumed."""
    if c_red0 < 0 or c_ox0 < 0:
        raise ValueError("surface concentrations must be non-negative")
    f = FARADAY / (GAS_CONSTANT * config.temperature)
    eta = E - config.E_r
    fwd = (c_red0 / config.c_red_inf) * math.exp(config.beta * f * eta)
    bwd = (c_ox0 / config.c_ox_inf) * math.exp(-(1.0 - config.beta) * f * eta)
    return config.k * (fwd - bwd)


def applied_potential(t, config):
    w = config.e_wave
    return w.E_dc + w.E_ac * np.sin(2.0 * np.pi * w.frequency * t)


def ferro_build(config):
    """Assemble the discretized kinetics-diffusion system."""
    n_z = config.n_z
    delta_red = diffusion_layer_thickness(config.D_red, config.nu, config.w_d)
    delta_ox = diffusion_layer_thickness(config.D_ox, config.nu, config.w_d)
    h_red = delta_red / (n_z - 1)
    h_ox = delta_ox / (n_z - 1)
    f_const = FARADAY / (GAS_CONSTANT * config.temperature)

    def species_laplacian(diffusivity, h):
        # Interior second differences; surface node gets the symmetric
        # 2(c1-c0)/h^2 form (flux enters separately); Dirichlet node frozen.
        main = np.full(n_z, -2.0)
        off_lo = np.ones(n_z - 1)
        off_hi = np.ones(n_z - 1)
        lap = sparse.diags([off_lo, main, off_hi], [-1, 0, 1], format="lil")
        lap[0, 1] = 2.0
        lap[n_z - 1, :] = 0.0
        return (diffusivity / h**2) * lap.tocsr()

    lap_red = species_laplacian(config.D_red, h_red)
    lap_ox = species_laplacian(config.D_ox, h_ox)
    i_e = 2 * n_z  # index of the potential state

    def rate_and_derivatives(E, c_red0, c_ox0):
        eta = E - config.E_r
        exp_f = math.exp(config.beta * f_const * eta)
        exp_b = math.exp(-(1.0 - config.beta) * f_const * eta)
        fwd = (c_red0 / config.c_red_inf) * exp_f
        bwd = (c_ox0 / config.c_ox_inf) * exp_b
        r = config.k * (fwd - bwd)
        dr_dE = config.k * f_const * (config.beta * fwd + (1.0 - config.beta) * bwd)
        dr_dcred = config.k * exp_f / config.c_red_inf
        dr_dcox = -config.k * exp_b / config.c_ox_inf
        return r, dr_dE, dr_dcred, dr_dcox

    def rhs(t, u):
        c_red, c_ox, E = u[:n_z], u[n_z:i_e], u[i_e]
        r = butler_volmer_rate(E, max(c_red[0], 0.0), max(c_ox[0], 0.0), config)
        dc_red = lap_red @ c_red
        dc_ox = lap_ox @ c_ox
        dc_red[0] -= 2.0 * r / h_red    # red consumed at the surface
        dc_ox[0] += 2.0 * r / h_ox      # ox produced at the surface
        current = (applied_potential(t, config) - E) / config.R_ohm
        dE = (current - FARADAY * r) / config.C_dl
        return np.concatenate([dc_red, dc_ox, [dE]])

    def jacobian(t, u):
        c_red, c_ox, E = u[:n_z], u[n_z:i_e], u[i_e]
        _, dr_dE, dr_dcred, dr_dcox = rate_and_derivatives(
            E, max(c_red[0], 0.0), max(c_ox[0], 0.0))
        jac = sparse.lil_matrix((2 * n_z + 1, 2 * n_z + 1))
        jac[:n_z, :n_z] = lap_red
        jac[n_z:i_e, n_z:i_e] = lap_ox
        jac[0, 0] += -2.0 / h_red * dr_dcred
        jac[0, n_z] = -2.0 / h_red * dr_dcox
        jac[0, i_e] = -2.0 / h_red * dr_dE
        jac[n_z, 0] = 2.0 / h_ox * dr_dcred
        jac[n_z, n_z] += 2.0 / h_ox * dr_dcox
        jac[n_z, i_e] = 2.0 / h_ox * dr_dE
        jac[i_e, 0] = -FARADAY * dr_dcred / config.C_dl
        jac[i_e, n_z] = -FARADAY * dr_dcox / config.C_dl
        jac[i_e, i_e] = (-1.0 / config.R_ohm - FARADAY * dr_dE) / config.C_dl
        return jac.tocsc()

    def output_map(u, t):
        return np.array([(applied_potential(t, config) - u[i_e]) / config.R_ohm])

    initial = np.concatenate([
        np.full(n_z, config.c_red_inf),
        np.full(n_z, config.c_ox_inf),
        [config.E_r],
    ])

    return OdeSystem(
        dimension=2 * n_z + 1,
        rhs=rhs,
        output_map=output_map,
        initial_state=initial,
        jacobian=jacobian,
        stiff=True,
        n_outputs=1,
        name="ferro",
    )
