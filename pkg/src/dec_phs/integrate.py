"""Time integration of linear port-Hamiltonian systems with energy diagnostics."""
from __future__ import annotations

import csv
import math
import warnings
import weakref
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import BlockStructureMissing, SingularSystem
from .phs import ConservationLaw, PortHamiltonianSystem

SOLVE_RTOL = 1e-12


# ---------------------------------------------------------------- signals


@dataclass(frozen=True)
class Zero:
    def __call__(self, t: float) -> float:
        return 0.0


@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, t: float) -> float:
        return self.value


@dataclass(frozen=True)
class Sinusoid:
    """amplitude * sin(2π frequency t + phase)."""

    amplitude: float
    frequency: float
    phase: float = 0.0

    def __call__(self, t: float) -> float:
        return self.amplitude * math.sin(2.0 * math.pi * self.frequency * t + self.phase)


@dataclass(frozen=True)
class PiecewiseConstant:
    """Holds values[i] on [times[i], times[i+1]); zero before times[0]."""

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.times) != len(self.values) or not self.times:
            raise ValueError("schedule needs matching, nonempty times and values")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("schedule times must increase strictly")

    def __call__(self, t: float) -> float:
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        return 0.0 if i < 0 else float(self.values[i])


PortSignal = Callable[[float], float]


@dataclass(frozen=True)
class InputSignal:
    """One scalar time function per input port."""

    ports: tuple[PortSignal, ...]

    @classmethod
    def zero(cls, nu: int) -> "InputSignal":
        return cls(tuple(Zero() for _ in range(nu)))

    @classmethod
    def from_ports(cls, nu: int, signals: Mapping[int, PortSignal]) -> "InputSignal":
        ports: list[PortSignal] = [Zero() for _ in range(nu)]
        for i, s in signals.items():
            if not 0 <= i < nu:
                raise ValueError(f"port {i} does not exist (system has {nu} ports)")
            ports[i] = s
        return cls(tuple(ports))

    def __call__(self, t: float) -> np.ndarray:
        return np.array([s(t) for s in self.ports], dtype=float)

    def __len__(self) -> int:
        return len(self.ports)


# --------------------------------------------------------------- steppers


class MidpointStepper:
    """Implicit midpoint map with a sparse LU factorization computed once."""

    def __init__(self, sys: PortHamiltonianSystem, dt: float):
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.dt = dt
        I = sp.identity(sys.nx, format="csc")
        self.lhs = sp.csc_matrix(I - 0.5 * dt * sys.A)
        self.rhs_op = sp.csr_matrix(I + 0.5 * dt * sys.A)
        self.G = sys.G
        try:
            self.lu = spla.splu(self.lhs)
        except RuntimeError as exc:
            raise SingularSystem(f"midpoint system matrix is singular: {exc}") from exc

    def __call__(self, x: np.ndarray, u_mid: np.ndarray) -> np.ndarray:
        rhs = self.rhs_op @ x + self.dt * (self.G @ u_mid)
        x1 = self.lu.solve(rhs)
        norm = float(np.linalg.norm(rhs))
        res = rhs - self.lhs @ x1
        if np.linalg.norm(res) > SOLVE_RTOL * norm:
            x1 = x1 + self.lu.solve(res)
            res = rhs - self.lhs @ x1
            if np.linalg.norm(res) > SOLVE_RTOL * norm or not np.all(np.isfinite(x1)):
                raise SingularSystem("midpoint solve residual above tolerance")
        return x1


_steppers: "weakref.WeakKeyDictionary[PortHamiltonianSystem, dict[float, MidpointStepper]]" = weakref.WeakKeyDictionary()


def _midpoint_stepper(sys: PortHamiltonianSystem, dt: float) -> MidpointStepper:
    per_sys = _steppers.setdefault(sys, {})
    if dt not in per_sys:
        per_sys[dt] = MidpointStepper(sys, dt)
    return per_sys[dt]


def step_midpoint(sys: PortHamiltonianSystem, x, u_mid, dt: float) -> np.ndarray:
    """One implicit midpoint step with the input evaluated at the step midpoint."""
    return _midpoint_stepper(sys, dt)(np.asarray(x, dtype=float), np.asarray(u_mid, dtype=float))


def _blocks(sys: PortHamiltonianSystem):
    if len(sys.partition) != 2:
        raise BlockStructureMissing("leapfrog needs a two-block state")
    n_p = sys.partition[0]
    A = sys.A.tocsr()
    A11, A22 = A[:n_p, :n_p], A[n_p:, n_p:]
    if (A11.nnz and abs(A11).max() > 0) or (A22.nnz and abs(A22).max() > 0):
        raise BlockStructureMissing("dynamics matrix is not block off-diagonal")
    return n_p, A[:n_p, n_p:].tocsr(), A[n_p:, :n_p].tocsr()


_stability: "weakref.WeakKeyDictionary[PortHamiltonianSystem, float]" = weakref.WeakKeyDictionary()


def leapfrog_stability_limit(sys: PortHamiltonianSystem) -> float:
    """Largest stable leapfrog step 2 / ω_max.

    ω_max² is the top eigenvalue of -A12·A21, computed on the symmetric
    form Q_p^½ (-J12 Q_q J21) Q_p^½ when the structure is skew.
    """
    if sys in _stability:
        return _stability[sys]
    n_p, _, _ = _blocks(sys)
    J = sys.J.tocsr()
    qd = sys.Q.diagonal()
    root = sp.diags(np.sqrt(qd[:n_p]))
    M = (-(root @ J[:n_p, n_p:] @ sp.diags(qd[n_p:]) @ J[n_p:, :n_p] @ root)).tocsr()
    asym = abs(M - M.T)
    if M.shape[0] == 0:
        lam = 0.0
    elif asym.nnz == 0 or asym.max() == 0:
        if M.shape[0] > 400:
            lam = float(spla.eigsh(M, k=1, which="LA", return_eigenvectors=False)[0])
        else:
            lam = float(np.linalg.eigvalsh(M.toarray()).max())
    else:
        lam = float(np.linalg.eigvals(M.toarray()).real.max())
    limit = 2.0 / math.sqrt(lam) if lam > 0 else math.inf
    _stability[sys] = limit
    return limit


def step_leapfrog(sys: PortHamiltonianSystem, x, u, dt: float) -> np.ndarray:
    """Störmer-Verlet step: half-step p, full-step q, half-step p."""
    n_p, A12, A21 = _blocks(sys)
    limit = leapfrog_stability_limit(sys)
    if dt >= limit:
        warnings.warn(f"leapfrog step {dt:g} exceeds the stability limit {limit:g}", RuntimeWarning, stacklevel=2)
    x = np.asarray(x, dtype=float)
    gu = sys.G @ np.asarray(u, dtype=float)
    p, q = x[:n_p], x[n_p:]
    p_half = p + 0.5 * dt * (A12 @ q + gu[:n_p])
    q1 = q + dt * (A21 @ p_half + gu[n_p:])
    p1 = p_half + 0.5 * dt * (A12 @ q1 + gu[:n_p])
    return np.concatenate([p1, q1])


# ------------------------------------------------------------- trajectory


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Simulation record; row k belongs to time ``times[k]``.

    For k >= 1 the input row is the midpoint input applied on the step
    ending at ``times[k]``, and ``power``/``balance_residual`` refer to
    that step.  Row 0 holds the initial input and instantaneous power.
    """

    times: np.ndarray
    states: np.ndarray
    inputs: np.ndarray
    outputs: np.ndarray
    H: np.ndarray
    power: np.ndarray
    invariants: np.ndarray
    balance_residual: np.ndarray
    state_columns: tuple[str, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.times)

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.times)

    def integrated_supply(self, boundary_map) -> float:
        """Midpoint-rule integral of boundary_mapᵀ u over the run."""
        b = np.asarray(boundary_map, dtype=float)
        return float(np.sum(self.dt * (self.inputs[1:] @ b)))

    def header(self) -> list[str]:
        cols = ["t"]
        cols += list(self.state_columns) or [f"x[{i}]" for i in range(self.states.shape[1])]
        cols += [f"u[{i}]" for i in range(self.inputs.shape[1])]
        cols += [f"y[{i}]" for i in range(self.outputs.shape[1])]
        cols += ["H", "power"]
        cols += [f"C_{i + 1}" for i in range(self.invariants.shape[1])]
        cols += ["balance_residual"]
        return cols

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.header())
            for k in range(len(self.times)):
                row = [self.times[k], *self.states[k], *self.inputs[k], *self.outputs[k], self.H[k], self.power[k]]
                row += [*self.invariants[k], self.balance_residual[k]]
                w.writerow([repr(float(v)) for v in row])


def state_columns(sys: PortHamiltonianSystem) -> tuple[str, ...]:
    cols: list[str] = []
    for symbol, size in zip(sys.symbols, sys.partition):
        cols += [f"{symbol}[{i}]" for i in range(size)]
    if len(cols) != sys.nx:
        cols = [f"x[{i}]" for i in range(sys.nx)]
    return tuple(cols)


def simulate(
    sys: PortHamiltonianSystem,
    signal: InputSignal | None,
    T: float,
    dt: float,
    method: str = "midpoint",
    x0=None,
    invariants: Sequence[ConservationLaw | np.ndarray] = (),
) -> Trajectory:
    """Integrate from ``x0`` (default zero) over [0, T] with fixed step ``dt``."""
    if not (T > 0 and dt > 0):
        raise ValueError("T and dt must be positive")
    steps = int(round(T / dt))
    if steps < 1 or abs(steps * dt - T) > 1e-9 * T:
        raise ValueError(f"T = {T:g} is not a whole number of steps of size {dt:g}")
    signal = signal or InputSignal.zero(sys.nu)
    if len(signal) != sys.nu:
        raise ValueError(f"signal has {len(signal)} ports, system has {sys.nu}")
    if method == "midpoint":
        stepper = _midpoint_stepper(sys, dt)
    elif method == "leapfrog":
        _blocks(sys)
        stepper = lambda x, u: step_leapfrog(sys, x, u, dt)  # noqa: E731
    else:
        raise ValueError(f"unknown integrator {method!r}")

    x = np.zeros(sys.nx) if x0 is None else np.array(x0, dtype=float).ravel()
    if x.size != sys.nx:
        raise ValueError(f"initial state has {x.size} entries, system has {sys.nx}")
    times = np.arange(steps + 1) * dt
    states = np.empty((steps + 1, sys.nx))
    inputs = np.empty((steps + 1, sys.nu))
    states[0] = x
    inputs[0] = signal(0.0)
    for k in range(steps):
        u_mid = signal(times[k] + 0.5 * dt)
        x = stepper(x, u_mid)
        states[k + 1] = x
        inputs[k + 1] = u_mid

    # diagnostics recomputed from the stored states
    grads = (sys.Q @ states.T).T
    H = 0.5 * np.einsum("ij,ij->i", states, grads)
    outputs = (sys.Gout.T @ grads.T).T
    power = np.empty(steps + 1)
    power[0] = outputs[0] @ inputs[0]
    g_mid = 0.5 * (grads[1:] + grads[:-1])
    y_mid = (sys.Gout.T @ g_mid.T).T
    power[1:] = np.einsum("ij,ij->i", y_mid, inputs[1:])
    dissipated = np.zeros(steps)
    if sys.R is not None:
        dissipated = np.einsum("ij,ij->i", g_mid, (sys.R @ g_mid.T).T)
    balance = np.zeros(steps + 1)
    balance[1:] = np.diff(H) - dt * (power[1:] - dissipated)

    coeffs = [inv.coefficients if isinstance(inv, ConservationLaw) else np.asarray(inv, dtype=float) for inv in invariants]
    inv_vals = states @ np.array(coeffs).T if coeffs else np.zeros((steps + 1, 0))
    return Trajectory(times, states, inputs, outputs, H, power, inv_vals, balance, state_columns(sys))
