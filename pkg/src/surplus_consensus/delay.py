"""Delay margins and rightmost quasi-polynomial roots.

The characteristic function of the delayed system is det(sI - M(eps) e^{-s tau});
its roots split per eigenvalue into s e^{s tau} = lambda_i(eps), solved branchwise
with the complex Lambert W function. An independent Chebyshev collocation of the
solution operator's generator serves as a cross-checking oracle.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import graph as graph_mod
from . import system as system_mod
from .errors import InvalidParameter, NumericalFailure, PreconditionViolated


@dataclass(frozen=True)
class DelayMargin:
    tau_c: float
    limiting_eigenvalue_index: int
    crossing_frequency: float


@dataclass(frozen=True)
class RightmostRoot:
    root: complex
    source_eigenvalue_index: int
    branch_index: int
    residual: float


@dataclass(frozen=True)
class StabilityMap:
    eps_grid: np.ndarray
    tau_grid: np.ndarray
    lambda_r_real: np.ndarray
    failures: list = field(default_factory=list)


def lambert_w(z, k=0, tol=1e-12, max_iter=100):
    """Branch k of the Lambert W function by Halley iteration.

    Returns w with w * e^w = z and |w e^w - z| <= tol (absolute).
    """
    z = complex(z)
    k = int(k)
    if z == 0:
        if k == 0:
            return 0j
        raise NumericalFailure("branch %d of W is singular at z = 0" % k)

    # initial guess
    p2 = 2.0 * (math.e * z + 1.0)
    if k == 0 and abs(z) <= 1.0 / math.e:
        w = z * (1.0 - z + 1.5 * z * z)
    elif k in (0, -1) and abs(p2) < 0.8:
        # series around the branch point at -1/e
        p = cmath.sqrt(p2)
        if k == -1:
            p = -p if z.imag >= 0 else p
        if k == 0 and z.imag < 0 and p.imag > 0:
            p = -p
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    elif k == -1 and z.imag == 0 and -1.0 / math.e < z.real < 0:
        ln = math.log(-z.real)
        w = complex(ln - math.log(-ln))
    else:
        w = cmath.log(z) + 2j * math.pi * k
        if abs(w) > 1.0:
            w = w - cmath.log(w)

    for _ in range(max_iter):
        ew = cmath.exp(w)
        f = w * ew - z
        if abs(f) <= tol:
            return w
        wp1 = w + 1.0
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        step = f / denom
        w = w - step
        if abs(step) <= 1e-17 * max(1.0, abs(w)):
            break
    if abs(w * cmath.exp(w) - z) <= tol:
        return w
    raise NumericalFailure(
        "Lambert W branch %d failed to converge for z = %r" % (k, z)
    )


def _check_stable_spectrum(spec):
    vals = spec.eigenvalues
    null_mask = np.abs(vals) <= spec.null_tolerance
    if spec.null_count != 1:
        raise PreconditionViolated(
            "expected exactly one null eigenvalue, found %d" % spec.null_count
        )
    if np.any(vals[~null_mask].real >= 0):
        raise PreconditionViolated("a non-null eigenvalue has non-negative real part")
    return null_mask


def tau_critical(spec):
    """Critical delay min_i (theta_i - pi/2) / |lambda_i| over non-null eigenvalues.

    Angles are folded into the upper half-plane, theta_i = |arg lambda_i| in
    (pi/2, pi]; the crossing frequency equals the limiting eigenvalue's modulus.
    """
    null_mask = _check_stable_spectrum(spec)
    best = None
    for i, lam in enumerate(spec.eigenvalues):
        if null_mask[i]:
            continue
        radius = abs(lam)
        theta = abs(np.angle(lam))
        value = (theta - math.pi / 2.0) / radius
        if best is None or value < best[0]:
            best = (value, i, radius)
    tau_c, idx, omega = best
    return DelayMargin(tau_c=tau_c, limiting_eigenvalue_index=idx,
                       crossing_frequency=omega)


def tau_tilde_bound(g, null_tolerance=system_mod.DEFAULT_NULL_TOLERANCE):
    """Topology-only delay bound (1 / 2 delta_bar) * arctan(|Re lambda_3(0)| / delta_bar).

    lambda_3(0) is the rightmost non-null eigenvalue of the eps = 0 system matrix.
    The absolute value repairs the sign of the bound, which is negative as
    literally stated for a Hurwitz eigenvalue.
    """
    if not graph_mod.is_strongly_connected(g):
        raise PreconditionViolated("delay bound requires a strongly connected graph")
    delta_bar = graph_mod.degree_profile(g).delta_bar
    spec = system_mod.spectrum(system_mod.build_system(g, 0.0), null_tolerance)
    nonnull = spec.eigenvalues[np.abs(spec.eigenvalues) > null_tolerance]
    lam3 = nonnull[np.argmax(nonnull.real)]
    return (1.0 / (2.0 * delta_bar)) * math.atan(abs(lam3.real) / delta_bar)


def rightmost_root(spec, tau, branch_window=2):
    """Rightmost non-null root of the quasi-polynomial at delay tau.

    Scans s = W_k(tau * lambda_i) / tau over every non-null eigenvalue and every
    branch k in [-branch_window, branch_window]; the null eigenvalue contributes
    only s = 0 and is excluded.
    """
    if tau <= 0:
        raise InvalidParameter("tau must be positive, got %r" % (tau,))
    best = None
    for i, lam in enumerate(spec.eigenvalues):
        if abs(lam) <= spec.null_tolerance:
            continue
        for k in range(-branch_window, branch_window + 1):
            s = lambert_w(tau * complex(lam), k) / tau
            key = (s.real, s.imag)
            if best is None or key > best[0]:
                residual = abs(s * cmath.exp(s * tau) - lam)
                best = (key, RightmostRoot(root=s, source_eigenvalue_index=i,
                                           branch_index=k, residual=residual))
    if best is None:
        raise PreconditionViolated("spectrum has no non-null eigenvalue")
    return best[1]


def chebyshev_nodes_diff(order, span):
    """Chebyshev-Gauss-Lobatto nodes on [-span, 0] (node 0 first) and the
    corresponding differentiation matrix."""
    n = order
    x = np.cos(np.pi * np.arange(n + 1) / n)
    x = span * (x - 1.0) / 2.0
    c = np.hstack([2.0, np.ones(n - 1), 2.0]) * (-1.0) ** np.arange(n + 1)
    xcol = np.tile(x, (n + 1, 1)).T
    dx = xcol - xcol.T
    d = np.outer(c, 1.0 / c) / (dx + np.eye(n + 1))
    d = d - np.diag(d.sum(axis=1))
    return x, d


def rightmost_root_oracle(sys, tau, discretization_order=30, null_tolerance=1e-7):
    """Rightmost non-null eigenvalue of a pseudospectral discretization of the
    delay system's generator on [-tau, 0]; independent of the Lambert W route."""
    if tau <= 0:
        raise InvalidParameter("tau must be positive, got %r" % (tau,))
    if discretization_order < 10:
        raise InvalidParameter("discretization order must be at least 10")
    m = sys.m.shape[0]
    order = int(discretization_order)
    _, d = chebyshev_nodes_diff(order, tau)
    gen = np.zeros((m * (order + 1), m * (order + 1)))
    # collocation rows: d/dtheta along the segment
    gen[m:, :] = np.kron(d[1:], np.eye(m))
    # boundary row at theta = 0: dy/dt = M y(-tau); the delay lands on the last node
    gen[:m, m * order:] = sys.m
    try:
        vals = np.linalg.eigvals(gen)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("oracle eigenvalue computation failed: %s" % exc)
    nonnull = vals[np.abs(vals) > null_tolerance]
    idx = np.lexsort((-nonnull.imag, -nonnull.real))[0]
    return complex(nonnull[idx])


def sweep_tau_c(g, eps_grid, null_tolerance=system_mod.DEFAULT_NULL_TOLERANCE):
    """tau_c over an epsilon grid. Returns (eps, DelayMargin | None, error | None)
    records; inadmissible grid points are reported, not fatal."""
    records = []
    for eps in eps_grid:
        try:
            spec = system_mod.spectrum(system_mod.build_system(g, eps), null_tolerance)
            records.append((float(eps), tau_critical(spec), None))
        except (PreconditionViolated, NumericalFailure, InvalidParameter) as exc:
            records.append((float(eps), None, str(exc)))
    return records


def stability_map(g, eps_grid, tau_grid, branch_window=2,
                  null_tolerance=system_mod.DEFAULT_NULL_TOLERANCE):
    """Real part of the rightmost non-null root per (eps, tau) cell.

    tau = 0 cells use the matrix eigenvalue directly. Failed cells hold NaN and
    are listed in .failures.
    """
    eps_grid = np.asarray(list(eps_grid), dtype=float)
    tau_grid = np.asarray(list(tau_grid), dtype=float)
    if eps_grid.size == 0 or tau_grid.size == 0:
        raise InvalidParameter("grids must be non-empty")
    values = np.full((eps_grid.size, tau_grid.size), np.nan)
    failures = []
    for a, eps in enumerate(eps_grid):
        try:
            spec = system_mod.spectrum(system_mod.build_system(g, eps), null_tolerance)
        except NumericalFailure as exc:
            failures.extend((a, b, str(exc)) for b in range(tau_grid.size))
            continue
        nonnull = spec.eigenvalues[np.abs(spec.eigenvalues) > null_tolerance]
        for b, tau in enumerate(tau_grid):
            try:
                if tau == 0.0:
                    values[a, b] = float(np.max(nonnull.real))
                else:
                    values[a, b] = rightmost_root(spec, tau, branch_window).root.real
            except (NumericalFailure, PreconditionViolated, InvalidParameter) as exc:
                failures.append((a, b, str(exc)))
    return StabilityMap(eps_grid=eps_grid, tau_grid=tau_grid,
                        lambda_r_real=values, failures=failures)


def bisect_tau_crossing(spec, lo, hi, rel_tol=1e-9, branch_window=2, max_iter=200):
    """Bisection on the sign of Re(rightmost root) over [lo, hi]."""
    flo = rightmost_root(spec, lo, branch_window).root.real
    fhi = rightmost_root(spec, hi, branch_window).root.real
    if flo >= 0 or fhi <= 0:
        raise PreconditionViolated(
            "bracket [%g, %g] does not straddle the crossing (f = %g, %g)"
            % (lo, hi, flo, fhi)
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if rightmost_root(spec, mid, branch_window).root.real < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rel_tol * hi:
            break
    return 0.5 * (lo + hi)
