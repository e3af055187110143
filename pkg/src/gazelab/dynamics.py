"""Second-order gaze dynamics over the precomputed fields.

The gaze point is a particle of mass m moving in the image plane under four
influences: an elastic border potential that confines it to the retina, an
attractive "curiosity" pull toward high edge energy that alternates between
the fine and the peripheral field at angular frequency omega, a
brightness-invariance coupling (weight lam) that penalizes motion along the
brightness gradient, and an optional top-down pull (weight gamma) up the
gradient of a supplied feature map.

For static stimuli the invariance term reduces to 2*lam*edge_energy(x)*|v|^2
(the simplified upper-bound form; the temporal-derivative slot is hard-wired
to zero). Expanding its velocity coupling leaves a position-dependent
effective inertia, giving the integrated law:

    (m - 4*lam*E(x)) * a = 4*lam*(gradE . v)*v - 2*lam*|v|^2*gradE
                           - gradV + eta*gradC + gamma*gradM

with E the edge energy, V the border potential, C the alternating curiosity
potential and M the top-down map. The effective inertia must stay positive;
parameter sets violating 4*lam*max(E) <= 0.9*m are rejected up front and a
runtime clamp at 0.05*m guards the remainder.

Integration is fixed-step classical Runge-Kutta (RK4): bit-reproducible and
uniformly sampled, which the saliency accumulation relies on.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

MIN_EFFECTIVE_INERTIA_FRAC = 0.05
STABILITY_MARGIN = 0.9


class ParameterError(ValueError):
    """Invalid or unstable dynamics parameters."""


class IntegrationDivergenceError(RuntimeError):
    """The integrator produced a non-finite state."""

    def __init__(self, t: float, x):
        super().__init__(f"integration diverged at t={t:.6f}s, x=({x[0]:.3f}, {x[1]:.3f})")
        self.t = t
        self.x = tuple(x)


@dataclass(frozen=True)
class DynamicsParams:
    """All model constants for one batch of runs.

    ``curiosity_weight``, ``invariance_weight`` and ``topdown_weight`` may be
    None, meaning "scale per image": curiosity and top-down gains are chosen
    so the 99th percentile of their force magnitude equals ``target_accel``,
    and the invariance weight takes ``invariance_frac`` of the largest value
    the stability bound allows. Explicit numbers disable the scaling.
    """

    mass: float = 1.0
    elastic_k: float = 5.0
    curiosity_weight: float | None = None
    invariance_weight: float | None = None
    topdown_weight: float | None = None
    alternation_omega: float = 2.0 * math.pi
    dt: float = 1e-3
    duration: float = 1.0
    init_pos_sigma: float = 5.0
    init_vel_sigma: float = 50.0
    n_runs: int = 10
    seed: int = 0
    target_accel: float = 1e4
    invariance_frac: float = 0.5

    def __post_init__(self):
        if self.mass <= 0:
            raise ParameterError(f"mass must be positive, got {self.mass}")
        if self.elastic_k < 0:
            raise ParameterError("elastic_k must be nonnegative")
        for name in ("curiosity_weight", "invariance_weight", "topdown_weight"):
            val = getattr(self, name)
            if val is not None and val < 0:
                raise ParameterError(f"{name} must be nonnegative, got {val}")
        if self.alternation_omega <= 0:
            raise ParameterError("alternation_omega must be positive")
        if self.dt <= 0:
            raise ParameterError("dt must be positive")
        if self.duration < self.dt:
            raise ParameterError("duration must be at least one dt")
        if self.init_pos_sigma < 0 or self.init_vel_sigma < 0:
            raise ParameterError("init spreads must be nonnegative")
        if self.n_runs < 1:
            raise ParameterError("n_runs must be at least 1")
        if not 0 <= self.invariance_frac <= 1:
            raise ParameterError("invariance_frac must lie in [0, 1]")
        if self.target_accel <= 0:
            raise ParameterError("target_accel must be positive")

    @property
    def is_resolved(self) -> bool:
        return (
            self.curiosity_weight is not None
            and self.invariance_weight is not None
            and self.topdown_weight is not None
        )


def resolve_params(p: DynamicsParams, fields) -> DynamicsParams:
    """Fill in auto-scaled weights for one image's fields.

    A field with no structure (uniform image, missing map) gets weight 0: the
    corresponding force is identically zero anyway.
    """
    updates = {}
    if p.curiosity_weight is None:
        grad = fields.grad_edge_energy
        mag = np.hypot(grad[..., 0], grad[..., 1])
        scale = float(np.percentile(mag, 99.0))
        updates["curiosity_weight"] = p.target_accel / scale if scale > 0 else 0.0
    if p.topdown_weight is None:
        if getattr(fields, "has_topdown", False):
            grad = fields.grad_topdown
            mag = np.hypot(grad[..., 0], grad[..., 1])
            scale = float(np.percentile(mag, 99.0))
            updates["topdown_weight"] = p.target_accel / scale if scale > 0 else 0.0
        else:
            updates["topdown_weight"] = 0.0
    if p.invariance_weight is None:
        max_e = fields.max_edge_energy()
        if max_e > 0:
            updates["invariance_weight"] = (
                p.invariance_frac * STABILITY_MARGIN * p.mass / (4.0 * max_e)
            )
        else:
            updates["invariance_weight"] = 0.0
    return replace(p, **updates) if updates else p


def check_stability(p: DynamicsParams, fields) -> None:
    """Reject parameter sets whose effective inertia could get near zero."""
    if not p.is_resolved:
        raise ParameterError("parameters must be resolved before simulation")
    limit = STABILITY_MARGIN * p.mass
    worst = 4.0 * p.invariance_weight * fields.max_edge_energy()
    if worst > limit:
        raise ParameterError(
            f"invariance weight too large: 4*lam*max(edge_energy)={worst:.4g} "
            f"exceeds {STABILITY_MARGIN}*mass={limit:.4g}"
        )


@dataclass(frozen=True)
class SimState:
    """Particle state: time (s), position (px) and velocity (px/s)."""

    t: float
    x: tuple[float, float]
    v: tuple[float, float]

    def is_finite(self) -> bool:
        return all(map(math.isfinite, (self.t, *self.x, *self.v)))


@dataclass(frozen=True)
class Trajectory:
    """Dense time-sampled path of one run: t[i] = i*dt, positions, velocities."""

    t: np.ndarray
    pos: np.ndarray
    vel: np.ndarray
    retina: tuple[int, int]

    def __post_init__(self):
        n = len(self.t)
        if self.pos.shape != (n, 2) or self.vel.shape != (n, 2):
            raise ValueError("trajectory arrays disagree on sample count")
        if n >= 2:
            steps = np.diff(self.t)
            if steps.min() <= 0 or np.ptp(steps) > 1e-9:
                raise ValueError("trajectory timestamps must increase uniformly")
        for arr in (self.t, self.pos, self.vel):
            arr.setflags(write=False)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if len(self.t) > 1 else 0.0

    def states(self):
        for i in range(len(self.t)):
            yield SimState(
                t=float(self.t[i]),
                x=(float(self.pos[i, 0]), float(self.pos[i, 1])),
                v=(float(self.vel[i, 0]), float(self.vel[i, 1])),
            )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("t,x,y,vx,vy\n")
            for i in range(len(self.t)):
                fh.write(
                    "%.9g,%.9g,%.9g,%.9g,%.9g\n"
                    % (self.t[i], self.pos[i, 0], self.pos[i, 1], self.vel[i, 0], self.vel[i, 1])
                )

    @classmethod
    def from_csv(cls, path, retina) -> "Trajectory":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(t=data[:, 0], pos=data[:, 1:3], vel=data[:, 3:5], retina=tuple(retina))


def retina_potential(x, retina, k: float) -> float:
    """Elastic border potential: zero inside the retina, quadratic outside."""
    l1, l2 = retina
    v = 0.0
    for xi, li in ((float(x[0]), l1), (float(x[1]), l2)):
        if xi > li:
            v += (li - xi) ** 2
        elif xi < 0.0:
            v += xi * xi
    return k * v


def retina_force(x, retina, k: float) -> tuple[float, float]:
    """-grad of the border potential; (0, 0) strictly inside the retina."""
    l1, l2 = retina
    out = [0.0, 0.0]
    for i, (xi, li) in enumerate(((float(x[0]), l1), (float(x[1]), l2))):
        if xi > li:
            out[i] = -2.0 * k * (xi - li)
        elif xi < 0.0:
            out[i] = -2.0 * k * xi
    return out[0], out[1]


def curiosity_force(x, t: float, fields, eta: float, omega: float) -> tuple[float, float]:
    """Attraction toward edge energy, alternating fine/peripheral with omega."""
    if eta == 0.0:
        return 0.0, 0.0
    c2 = math.cos(omega * t) ** 2
    s2 = 1.0 - c2
    gb1, gb2 = fields.grad_edge_energy_at(x)
    gp1, gp2 = fields.grad_periph_energy_at(x)
    return eta * (c2 * gb1 + s2 * gp1), eta * (c2 * gb2 + s2 * gp2)


def topdown_force(x, fields, gamma: float) -> tuple[float, float]:
    """Pull up the top-down map gradient; exactly zero without a map."""
    if gamma == 0.0 or not getattr(fields, "has_topdown", False):
        return 0.0, 0.0
    g1, g2 = fields.grad_topdown_at(x)
    return gamma * g1, gamma * g2


def acceleration(state: SimState, fields, p: DynamicsParams) -> tuple[float, float]:
    """Evaluate the expanded motion law at one state.

    The effective inertia m - 4*lam*E(x) is clamped below at 0.05*m; the
    startup stability check keeps honest parameter sets away from the clamp.
    """
    x = state.x
    v1, v2 = state.v
    f1, f2 = retina_force(x, fields.retina, p.elastic_k)

    eta = p.curiosity_weight
    if eta:
        c1, c2 = curiosity_force(x, state.t, fields, eta, p.alternation_omega)
        f1 += c1
        f2 += c2

    gamma = p.topdown_weight
    if gamma and getattr(fields, "has_topdown", False):
        m1, m2 = topdown_force(x, fields, gamma)
        f1 += m1
        f2 += m2

    lam = p.invariance_weight
    if lam:
        e = fields.edge_energy_at(x)
        ge1, ge2 = fields.grad_edge_energy_at(x)
        ge_dot_v = ge1 * v1 + ge2 * v2
        speed2 = v1 * v1 + v2 * v2
        f1 += 4.0 * lam * ge_dot_v * v1 - 2.0 * lam * speed2 * ge1
        f2 += 4.0 * lam * ge_dot_v * v2 - 2.0 * lam * speed2 * ge2
        m_eff = p.mass - 4.0 * lam * e
        min_m = MIN_EFFECTIVE_INERTIA_FRAC * p.mass
        if m_eff < min_m:
            m_eff = min_m
    else:
        m_eff = p.mass

    return f1 / m_eff, f2 / m_eff


def rk4_step(state: SimState, fields, p: DynamicsParams) -> SimState:
    """One classical 4th-order Runge-Kutta step of size dt on (x, v)."""
    dt = p.dt
    t = state.t
    x1, x2 = state.x
    v1, v2 = state.v

    a1, a2 = acceleration(state, fields, p)

    h = 0.5 * dt
    s2 = SimState(t + h, (x1 + h * v1, x2 + h * v2), (v1 + h * a1, v2 + h * a2))
    b1, b2 = acceleration(s2, fields, p)

    s3 = SimState(t + h, (x1 + h * s2.v[0], x2 + h * s2.v[1]), (v1 + h * b1, v2 + h * b2))
    c1, c2 = acceleration(s3, fields, p)

    s4 = SimState(t + dt, (x1 + dt * s3.v[0], x2 + dt * s3.v[1]), (v1 + dt * c1, v2 + dt * c2))
    d1, d2 = acceleration(s4, fields, p)

    sixth = dt / 6.0
    new = SimState(
        t=t + dt,
        x=(
            x1 + sixth * (v1 + 2.0 * s2.v[0] + 2.0 * s3.v[0] + s4.v[0]),
            x2 + sixth * (v2 + 2.0 * s2.v[1] + 2.0 * s3.v[1] + s4.v[1]),
        ),
        v=(
            v1 + sixth * (a1 + 2.0 * b1 + 2.0 * c1 + d1),
            v2 + sixth * (a2 + 2.0 * b2 + 2.0 * c2 + d2),
        ),
    )
    if not new.is_finite():
        raise IntegrationDivergenceError(new.t, new.x)
    return new


def run_rng(seed: int, run_index: int) -> np.random.Generator:
    """Independent, order-insensitive stream for one run."""
    return np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, run_index]))


def initial_state(fields, p: DynamicsParams, run_index: int) -> SimState:
    """Near-center position, small random velocity; clamped into the retina."""
    rng = run_rng(p.seed, run_index)
    l1, l2 = fields.retina
    cx = (l1 - 1) / 2.0
    cy = (l2 - 1) / 2.0
    dx, dy = rng.normal(0.0, 1.0, size=2)
    x1 = min(max(cx + p.init_pos_sigma * dx, 0.0), float(l1))
    x2 = min(max(cy + p.init_pos_sigma * dy, 0.0), float(l2))
    dvx, dvy = rng.normal(0.0, 1.0, size=2)
    return SimState(t=0.0, x=(x1, x2), v=(p.init_vel_sigma * dvx, p.init_vel_sigma * dvy))


def simulate_run(fields, p: DynamicsParams, run_index: int) -> Trajectory:
    """Integrate one seeded run over the fields; returns the dense trajectory."""
    p = resolve_params(p, fields)
    check_stability(p, fields)
    n_steps = int(math.floor(p.duration / p.dt + 1e-9))

    state = initial_state(fields, p, run_index)
    t = np.empty(n_steps + 1)
    pos = np.empty((n_steps + 1, 2))
    vel = np.empty((n_steps + 1, 2))
    for i in range(n_steps + 1):
        t[i] = state.t
        pos[i, 0], pos[i, 1] = state.x
        vel[i, 0], vel[i, 1] = state.v
        if i < n_steps:
            state = rk4_step(state, fields, p)
    return Trajectory(t=t, pos=pos, vel=vel, retina=fields.retina)


def kinetic_energy(state: SimState, p: DynamicsParams) -> float:
    """Diagnostic: 0.5*m*|v|^2."""
    v1, v2 = state.v
    return 0.5 * p.mass * (v1 * v1 + v2 * v2)
