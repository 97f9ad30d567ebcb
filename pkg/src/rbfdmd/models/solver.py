"""Time integration with snapshot capture on a fixed output grid.

Stiff systems go through scipy's BDF (variable-order backward
differentiation with Newton inner solves and adaptive step rejection);
non-stiff systems through RK45. The wrapper pins down the output grid,
validation, and the failure contract: a non-converged integration raises
:class:`IntegrationError` carrying the time actually reached.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp


class IntegrationError(RuntimeError):
    """Integration failed; ``t_reached`` is the last accepted time."""

    def __init__(self, message, t_reached):
        super().__init__(f"{message} (reached t = {t_reached:.6g})")
        self.t_reached = t_reached


def output_times(t_end, dt_out):
    """The grid 0, dt_out, ..., t_end; dt_out must divide t_end."""
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if dt_out <= 0:
        raise ValueError("dt_out must be positive")
    n_steps = t_end / dt_out
    if abs(n_steps - round(n_steps)) > 1e-9 * max(1.0, n_steps):
        raise ValueError(f"dt_out={dt_out} does not divide t_end={t_end}")
    return np.linspace(0.0, t_end, round(n_steps) + 1)


def integrate(system, t_end, dt_out, rel_tol=1e-6, abs_tol=1e-9):
    """Integrate ``system`` from its initial state; columns are the states at
    0, dt_out, ..., t_end."""
    times = output_times(t_end, dt_out)
    method = "BDF" if system.stiff else "RK45"
    options = {}
    if system.stiff and system.jacobian is not None:
        options["jac"] = system.jacobian
    sol = solve_ivp(
        system.rhs,
        (0.0, t_end),
        np.asarray(system.initial_state, dtype=float),
        method=method,
        t_eval=times,
        rtol=rel_tol,
        atol=abs_tol,
        **options,
    )
    if not sol.success:
        reached = float(sol.t[-1]) if sol.t.size else 0.0
        raise IntegrationError(f"{method} failed: {sol.message}", reached)
    return sol.y
