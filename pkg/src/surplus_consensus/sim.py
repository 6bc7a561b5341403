"""Simulation of the delayed network dynamics with consensus metrics."""

import json
from dataclasses import dataclass, field

import numpy as np

from . import _integrator
from .errors import InvalidConfig

DEFAULT_CONSENSUS_TOLERANCE = 1e-4
DEFAULT_DIVERGENCE_THRESHOLD = 1e6


@dataclass(frozen=True)
class SimConfig:
    epsilon: float
    tau: float
    x0: np.ndarray
    z0: np.ndarray = None
    dt: float = None
    t_final: float = 40.0
    consensus_tolerance: float = DEFAULT_CONSENSUS_TOLERANCE
    divergence_threshold: float = DEFAULT_DIVERGENCE_THRESHOLD

    def resolved(self):
        """Fill defaults (z0 = 0, dt = tau/50 or 1e-2) and validate invariants."""
        x0 = np.asarray(self.x0, dtype=float)
        z0 = np.zeros_like(x0) if self.z0 is None else np.asarray(self.z0, dtype=float)
        if z0.shape != x0.shape:
            raise InvalidConfig("x0 and z0 must have the same length")
        dt = self.dt
        if dt is None:
            dt = self.tau / 50.0 if self.tau > 0 else 1e-2
        if dt <= 0:
            raise InvalidConfig("dt must be positive, got %r" % (dt,))
        if self.tau < 0:
            raise InvalidConfig("tau must be non-negative, got %r" % (self.tau,))
        if self.t_final <= 0 or self.t_final < self.tau:
            raise InvalidConfig("t_final must be positive and at least tau")
        delay_steps = 0
        if self.tau > 0:
            ratio = self.tau / dt
            delay_steps = int(round(ratio))
            if abs(ratio - delay_steps) > 1e-9 * max(1.0, ratio):
                raise InvalidConfig(
                    "tau/dt = %r must be an integer for history alignment" % (ratio,)
                )
            if delay_steps < 10:
                raise InvalidConfig("tau/dt must be at least 10, got %d" % delay_steps)
        return x0, z0, float(dt), delay_steps


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    consensus_error: np.ndarray
    conservation_drift: np.ndarray
    verdict: str
    decision_time: float
    target: float


def consensus_target(cfg):
    """The invariant consensus value (1'x0 + 1'z0) / n."""
    x0 = np.asarray(cfg.x0, dtype=float)
    z0 = np.zeros_like(x0) if cfg.z0 is None else np.asarray(cfg.z0, dtype=float)
    return float((x0.sum() + z0.sum()) / x0.size)


def simulate(sys, cfg):
    """Integrate the delayed dynamics and grade the run.

    Verdict: 'converged' once the consensus error stays below the tolerance for
    a window of 5% of t_final; 'diverged' when any state exceeds the divergence
    threshold (or turns non-finite); otherwise 'inconclusive'.
    """
    x0, z0, dt, delay_steps = cfg.resolved()
    n = x0.size
    if sys.m.shape[0] != 2 * n:
        raise InvalidConfig("system dimension %d does not match x0 length %d"
                            % (sys.m.shape[0], 2 * n))
    nsteps = int(round(cfg.t_final / dt))
    y0 = np.ascontiguousarray(np.concatenate([x0, z0]))
    mat = np.ascontiguousarray(sys.m)
    if delay_steps > 0:
        states, _, last = _integrator.integrate_delayed(
            mat, y0, delay_steps, nsteps, dt, cfg.divergence_threshold)
    else:
        states, last = _integrator.integrate_undelayed(
            mat, y0, nsteps, dt, cfg.divergence_threshold)
    states = states[:last + 1]
    times = dt * np.arange(last + 1)

    target = consensus_target(cfg)
    err = np.max(np.abs(states[:, :n] - target), axis=1)
    total0 = y0.sum()
    drift = np.abs(states.sum(axis=1) - total0)

    if last < nsteps:
        verdict, decision_time = "diverged", times[-1]
    else:
        verdict, decision_time = "inconclusive", times[-1]
        window = max(1, int(round(0.05 * cfg.t_final / dt)))
        below = err < cfg.consensus_tolerance
        run = 0
        for i, flag in enumerate(below):
            run = run + 1 if flag else 0
            if run >= window + 1:
                verdict, decision_time = "converged", times[i]
                break
    return Trajectory(times=times, states=states, consensus_error=err,
                      conservation_drift=drift, verdict=verdict,
                      decision_time=float(decision_time), target=target)


def convergence_time(traj, tol):
    """First time after which the consensus error stays below tol; None if never."""
    below = traj.consensus_error < tol
    if not below[-1]:
        return None
    # last index where the error is at or above tol
    above = np.nonzero(~below)[0]
    if above.size == 0:
        return 0.0
    return float(traj.times[above[-1] + 1])


def write_trajectory_csv(traj, path):
    n = traj.states.shape[1] // 2
    header = (["t"] + ["x%d" % i for i in range(1, n + 1)]
              + ["z%d" % i for i in range(1, n + 1)]
              + ["consensus_error", "conservation_drift"])
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(traj.times.size):
            row = ([traj.times[i]] + list(traj.states[i])
                   + [traj.consensus_error[i], traj.conservation_drift[i]])
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def write_metadata(traj, cfg, path, seed=None, extra=None):
    x0, z0, dt, _ = cfg.resolved()
    doc = {
        "epsilon": cfg.epsilon,
        "tau": cfg.tau,
        "dt": dt,
        "t_final": cfg.t_final,
        "x0": list(x0),
        "z0": list(z0),
        "consensus_tolerance": cfg.consensus_tolerance,
        "divergence_threshold": cfg.divergence_threshold,
        "seed": seed,
        "verdict": traj.verdict,
        "decision_time": traj.decision_time,
        "consensus_target": traj.target,
        "convergence_time": convergence_time(traj, cfg.consensus_tolerance),
        "integrator_backend": _integrator.backend(),
    }
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
