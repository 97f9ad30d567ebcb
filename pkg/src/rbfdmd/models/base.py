"""Method-of-lines system description shared by the benchmark models."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass
class OdeSystem:
    """A first-order ODE system ``du/dt = rhs(t, u)`` with an output map.

    ``output_map(u, t)`` extracts the quantities of interest from one state
    vector (time enters only for outputs that depend on a time-varying
    input). ``jacobian(t, u)``, when given, returns a dense or sparse
    ``(n, n)`` matrix. ``rhs`` and ``jacobian`` are pure functions.
    """

    dimension: int
    rhs: Callable
    output_map: Callable
    initial_state: np.ndarray
    jacobian: Callable | None = None
    stiff: bool = False
    n_outputs: int = 1
    name: str = "system"

    def outputs_of(self, states, times):
        """Apply the output map columnwise: (n, n_T) states -> (n_o, n_T)."""
        states = np.asarray(states)
        times = np.asarray(times, dtype=float)
        if states.shape[1] != times.shape[0]:
            raise ValueError("one time per state column required")
        cols = [np.atleast_1d(self.output_map(states[:, j], times[j]))
                for j in range(states.shape[1])]
        return np.column_stack(cols)
