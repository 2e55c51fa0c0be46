"""Classical SIR macro model, fixed-step RK4.

The frequency-dependent form is used throughout:

    dS/dt = -beta * S * I / N
    dI/dt =  beta * S * I / N - gamma * I
    dR/dt =  gamma * I

This is the homogeneous-mixing baseline the micro simulation is compared
against; the integrator is deliberately fixed-step for reproducibility at
desk-scale horizons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class SirError(ValueError):
    pass


@dataclass(frozen=True)
class SirParams:
    beta_macro: float
    gamma: float
    population_n: float
    s0: float
    i0: float
    r0_count: float = 0.0

    def validate(self) -> list[str]:
        errors = []
        if self.beta_macro < 0:
            errors.append("beta_macro must be nonnegative")
        if self.gamma <= 0:
            errors.append("gamma must be positive")
        if self.population_n <= 0:
            errors.append("population_n must be positive")
        if min(self.s0, self.i0, self.r0_count) < 0:
            errors.append("initial compartments must be nonnegative")
        if abs(self.s0 + self.i0 + self.r0_count - self.population_n) > 1e-9 * max(1.0, self.population_n):
            errors.append("s0 + i0 + r0_count must equal population_n")
        return errors


@dataclass
class SirTrajectory:
    times: np.ndarray
    s: np.ndarray
    i: np.ndarray
    r: np.ndarray

    @property
    def peak_time(self) -> float:
        return float(self.times[int(np.argmax(self.i))])

    @property
    def final_size(self) -> float:
        """Total ever infected over the run: N - S(end)."""
        return float(self.s[0] + self.i[0] + self.r[0] - self.s[-1])

    def to_csv(self) -> str:
        lines = ["time,s,i,r"]
        for t, s, i, r in zip(self.times, self.s, self.i, self.r):
            lines.append(f"{t:.6g},{s:.8g},{i:.8g},{r:.8g}")
        return "\n".join(lines) + "\n"


def _deriv(y: np.ndarray, beta: float, gamma: float, n: float) -> np.ndarray:
    s, i, _ = y
    infections = beta * s * i / n
    return np.array([-infections, infections - gamma * i, gamma * i])


def integrate_sir(params: SirParams, dt: float, horizon: float) -> SirTrajectory:
    """Integrate the SIR equations with classical 4th-order Runge-Kutta."""
    errors = params.validate()
    if errors:
        raise SirError("; ".join(errors))
    if dt <= 0 or horizon <= 0 or dt > horizon:
        raise SirError(f"need 0 < dt <= horizon, got dt={dt}, horizon={horizon}")
    steps = int(round(horizon / dt))
    times = np.linspace(0.0, steps * dt, steps + 1)
    out = np.empty((steps + 1, 3))
    out[0] = (params.s0, params.i0, params.r0_count)
    beta, gamma, n = params.beta_macro, params.gamma, params.population_n
    y = out[0].copy()
    for k in range(steps):
        k1 = _deriv(y, beta, gamma, n)
        k2 = _deriv(y + 0.5 * dt * k1, beta, gamma, n)
        k3 = _deriv(y + 0.5 * dt * k2, beta, gamma, n)
        k4 = _deriv(y + dt * k3, beta, gamma, n)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise SirError(f"non-finite state at step {k + 1} (t={times[k + 1]:.6g})")
        out[k + 1] = y
    return SirTrajectory(times=times, s=out[:, 0], i=out[:, 1], r=out[:, 2])


def macro_r0(params: SirParams) -> float:
    """The ex-ante basic reproductive rate of the macro model: beta / gamma."""
    return params.beta_macro / params.gamma


@dataclass
class DivergenceReport:
    """Macro-vs-micro gap measurements; no judgment threshold baked in."""

    mean_i_gap: float
    peak_time_macro: float
    peak_time_micro: float
    peak_time_gap: float
    final_size_macro: float
    final_size_micro: float
    final_size_gap: float
    points_compared: int = 0
    notes: dict = field(default_factory=dict)


def compare_macro_micro(
    trajectory: SirTrajectory,
    micro_ticks: list[int],
    micro_infected: list[float],
    micro_final_size: float,
    tick_length_days: float = 1.0,
) -> DivergenceReport:
    """Quantify the gap between an ODE trajectory and a micro run's I series.

    Micro ticks are mapped to days via the tick length and the macro I curve
    is linearly interpolated onto them; the report carries the per-tick mean
    absolute I gap, the peak-time gap, and the final-size gap.
    """
    if len(micro_ticks) != len(micro_infected):
        raise SirError("micro series lengths differ")
    if not micro_ticks:
        raise SirError("micro series is empty")
    micro_days = np.asarray(micro_ticks, dtype=float) * tick_length_days
    if micro_days[-1] > trajectory.times[-1] + 1e-9:
        raise SirError(
            f"micro horizon {micro_days[-1]:.6g}d exceeds macro horizon {trajectory.times[-1]:.6g}d"
        )
    macro_i = np.interp(micro_days, trajectory.times, trajectory.i)
    gaps = np.abs(macro_i - np.asarray(micro_infected, dtype=float))
    micro_peak_tick = int(micro_ticks[int(np.argmax(micro_infected))])
    peak_micro = micro_peak_tick * tick_length_days
    return DivergenceReport(
        mean_i_gap=float(np.mean(gaps)),
        peak_time_macro=trajectory.peak_time,
        peak_time_micro=peak_micro,
        peak_time_gap=abs(trajectory.peak_time - peak_micro),
        final_size_macro=trajectory.final_size,
        final_size_micro=float(micro_final_size),
        final_size_gap=abs(trajectory.final_size - float(micro_final_size)),
        points_compared=len(micro_ticks),
    )


def geometric_equivalent_stage(gamma: float) -> tuple[int, int]:
    """Integer uniform duration bounds [1, 2/gamma - 1] with mean 1/gamma.

    The discrete-tick analogue of an exponential infectious period with rate
    gamma; requires 1/gamma to be an integer >= 1.
    """
    mean = 1.0 / gamma
    if abs(mean - round(mean)) > 1e-9 or mean < 1:
        raise SirError(f"1/gamma must be a positive integer, got {mean}")
    mean = int(round(mean))
    return 1, 2 * mean - 1


def stochastic_die_out_note(r0: float) -> float:
    """Extinction probability of a Poisson(r0) branching process (one case)."""
    if r0 <= 1.0:
        return 1.0
    q = 0.5
    for _ in range(200):
        q = math.exp(r0 * (q - 1.0))
    return q
