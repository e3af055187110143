import math

import numpy as np
import pytest

from gazelab.dynamics import (
    DynamicsParams,
    IntegrationDivergenceError,
    ParameterError,
    SimState,
    Trajectory,
    acceleration,
    check_stability,
    curiosity_force,
    initial_state,
    kinetic_energy,
    resolve_params,
    retina_force,
    retina_potential,
    rk4_step,
    simulate_run,
    topdown_force,
)
from gazelab.fields import build_fieldset, field_gradient
from gazelab.imageio import Image

from conftest import SmoothAnalyticFields, ZeroFields, blob_image, fd_gradient, make_image


def explicit(eta=0.0, lam=0.0, gamma=0.0, **kw):
    return DynamicsParams(
        curiosity_weight=eta, invariance_weight=lam, topdown_weight=gamma, **kw
    )


class TestRetinaForce:
    def test_zero_inside(self):
        assert retina_force((32, 24), (64, 48), 1.0) == (0.0, 0.0)

    def test_beyond_right_border(self):
        # dV/dx1 = 2k(x1-l1) for x1 > l1, differentiated by hand
        f = retina_force((74, 24), (64, 48), 1.0)
        assert f == (-20.0, 0.0)

    def test_negative_side_restoring(self):
        f = retina_force((-3, -4), (64, 48), 2.0)
        assert f == (12.0, 16.0)

    def test_gradient_matches_potential(self):
        # central differences of V are exact away from the kinks (V is
        # piecewise quadratic)
        rng = np.random.default_rng(0)
        retina = (64, 48)
        k = 5.0
        h = 1e-4
        checked = 0
        while checked < 500:
            x = rng.uniform(-30, 94), rng.uniform(-30, 78)
            if any(abs(xi - b) < 2 * h for xi in x for b in (0.0, 64.0, 48.0)):
                continue
            f = retina_force(x, retina, k)
            fd = (
                -(retina_potential((x[0] + h, x[1]), retina, k) - retina_potential((x[0] - h, x[1]), retina, k)) / (2 * h),
                -(retina_potential((x[0], x[1] + h), retina, k) - retina_potential((x[0], x[1] - h), retina, k)) / (2 * h),
            )
            assert abs(f[0] - fd[0]) <= 1e-6
            assert abs(f[1] - fd[1]) <= 1e-6
            checked += 1


class TestCuriosityForce:
    def test_t_zero_uses_fine_field_only(self):
        fields = SmoothAnalyticFields()
        x = (22.3, 17.8)
        f = curiosity_force(x, 0.0, fields, eta=2.0, omega=2 * math.pi)
        expected = tuple(2.0 * g for g in fields.grad_edge_energy_at(x))
        assert f == pytest.approx(expected, abs=0.0)

    def test_quarter_phase_uses_peripheral_only(self):
        fields = SmoothAnalyticFields()
        omega = 2 * math.pi
        x = (22.3, 17.8)
        f = curiosity_force(x, math.pi / (2 * omega), fields, eta=2.0, omega=omega)
        expected = tuple(2.0 * g for g in fields.grad_periph_energy_at(x))
        assert f == pytest.approx(expected, abs=1e-12)

    def test_uniform_image_no_force(self):
        fields = build_fieldset(make_image(kind="uniform"))
        for t in (0.0, 0.1, 0.3):
            assert curiosity_force((10, 10), t, fields, 5.0, 2 * math.pi) == (0.0, 0.0)


class TestTopdownForce:
    def test_zero_gamma(self):
        fields = SmoothAnalyticFields()
        assert topdown_force((5, 5), fields, 0.0) == (0.0, 0.0)

    def test_no_map_degrades_cleanly(self):
        fields = build_fieldset(make_image(kind="gradient"))
        assert topdown_force((5, 5), fields, 3.0) == (0.0, 0.0)

    def test_bump_attracts_toward_center(self):
        fields = SmoothAnalyticFields(center=(30.0, 20.0))
        f = topdown_force((45.0, 20.0), fields, 1.0)
        assert f[0] < 0  # pull left, toward the bump
        f = topdown_force((15.0, 20.0), fields, 1.0)
        assert f[0] > 0


class TestAcceleration:
    def test_free_particle(self):
        fields = ZeroFields(retina=(64, 48))
        s = SimState(0.0, (30.0, 20.0), (5.0, -3.0))
        assert acceleration(s, fields, explicit()) == (0.0, 0.0)

    def test_elastic_only_beyond_border(self):
        fields = ZeroFields(retina=(64, 48))
        p = explicit(mass=2.0, elastic_k=3.0)
        s = SimState(0.0, (70.0, 20.0), (0.0, 0.0))
        a = acceleration(s, fields, p)
        assert a[0] == pytest.approx(-2 * 3.0 * 6.0 / 2.0)
        assert a[1] == 0.0

    def test_uniform_image_invariance_term_inert(self):
        fields = build_fieldset(make_image(kind="uniform"))
        s = SimState(0.0, (30.0, 20.0), (40.0, -10.0))
        a0 = acceleration(s, fields, explicit(lam=0.0))
        a1 = acceleration(s, fields, explicit(lam=0.8))
        assert a0 == a1

    def test_el_residual_on_smooth_fields(self):
        # high-order finite differences of the scalar potentials vs the
        # expanded formula; the residual of the motion law must vanish
        fields = SmoothAnalyticFields()
        p = explicit(eta=3.0, lam=0.9, gamma=2.0, mass=1.0, elastic_k=5.0)
        check_stability(p, fields)
        rng = np.random.default_rng(42)
        omega = p.alternation_omega
        worst = 0.0
        for _ in range(100):
            x1, x2 = rng.uniform(-5, 70), rng.uniform(-5, 55)
            v1, v2 = rng.uniform(-80, 80, size=2)
            t = rng.uniform(0, 1)
            s = SimState(t, (x1, x2), (v1, v2))
            a1, a2 = acceleration(s, fields, p)

            ge = fd_gradient(fields.edge_energy, x1, x2)
            gc = fd_gradient(
                lambda u, w: fields.edge_energy(u, w) * math.cos(omega * t) ** 2
                + fields.periph_energy(u, w) * math.sin(omega * t) ** 2,
                x1,
                x2,
            )
            gm = fd_gradient(fields.topdown, x1, x2)
            gv = fd_gradient(lambda u, w: retina_potential((u, w), fields.retina, p.elastic_k), x1, x2)
            e_val = fields.edge_energy(x1, x2)
            ge_dot_v = ge[0] * v1 + ge[1] * v2
            speed2 = v1 * v1 + v2 * v2
            for i, (ai, vi) in enumerate(((a1, v1), (a2, v2))):
                residual = (
                    p.mass * ai
                    - p.invariance_weight * (4 * ge_dot_v * vi + 4 * e_val * ai)
                    + gv[i]
                    - p.curiosity_weight * gc[i]
                    + p.invariance_weight * 2 * speed2 * ge[i]
                    - p.topdown_weight * gm[i]
                )
                worst = max(worst, abs(residual))
        assert worst <= 1e-6

    def test_effective_inertia_clamp_guards(self):
        class SpikyFields(ZeroFields):
            def edge_energy_at(self, x):
                return 100.0  # way past the stability bound

            def max_edge_energy(self):
                return 100.0

        fields = SpikyFields(retina=(64, 48))
        p = explicit(lam=1.0)
        s = SimState(0.0, (10.0, 10.0), (1.0, 0.0))
        a = acceleration(s, fields, p)
        assert all(map(math.isfinite, a))


class TestStability:
    def test_violating_params_rejected(self):
        fields = SmoothAnalyticFields(e0=1.0)
        with pytest.raises(ParameterError):
            check_stability(explicit(lam=1.0, mass=1.0), fields)

    def test_auto_invariance_respects_bound(self, noise_fields):
        p = resolve_params(DynamicsParams(), noise_fields)
        check_stability(p, noise_fields)
        assert 4 * p.invariance_weight * noise_fields.max_edge_energy() <= 0.9 * p.mass + 1e-12

    def test_auto_weights_zero_on_uniform_image(self):
        fields = build_fieldset(make_image(kind="uniform"))
        p = resolve_params(DynamicsParams(), fields)
        assert p.curiosity_weight == 0.0
        assert p.invariance_weight == 0.0
        assert p.topdown_weight == 0.0

    def test_param_validation(self):
        with pytest.raises(ParameterError):
            DynamicsParams(mass=0.0)
        with pytest.raises(ParameterError):
            DynamicsParams(dt=1e-3, duration=1e-4)
        with pytest.raises(ParameterError):
            DynamicsParams(curiosity_weight=-1.0)


class TestRk4:
    def test_exact_for_linear_motion(self):
        fields = ZeroFields(retina=(64, 48))
        p = explicit(dt=1e-3)
        s = SimState(0.0, (10.0, 10.0), (10.0, 0.0))
        out = rk4_step(s, fields, p)
        assert out.x == (10.0 + 10.0 * 1e-3, 10.0)
        assert out.v == (10.0, 0.0)

    def test_divergence_raises_with_location(self):
        class ExplosiveFields(ZeroFields):
            def grad_edge_energy_at(self, x):
                return 1e308, 1e308

        fields = ExplosiveFields(retina=(64, 48))
        p = explicit(eta=1e308, dt=1e-3)
        s = SimState(0.0, (10.0, 10.0), (0.0, 0.0))
        with pytest.raises(IntegrationDivergenceError) as err:
            rk4_step(s, fields, p)
        assert "t=" in str(err.value)

    def _oscillator_run(self, dt, n_steps, mass=1.0, k=5.0, amp=10.0):
        # degenerate retina at (0, 0) makes the border potential globally
        # harmonic: force = -2k*x everywhere, period 2*pi*sqrt(m/(2k))
        fields = ZeroFields(retina=(0, 0))
        p = explicit(mass=mass, elastic_k=k, dt=dt)
        s = SimState(0.0, (amp, 0.0), (0.0, 0.0))
        xs = [s.x[0]]
        vs = [s.v[0]]
        for _ in range(n_steps):
            s = rk4_step(s, fields, p)
            xs.append(s.x[0])
            vs.append(s.v[0])
        return np.array(xs), np.array(vs), p

    def test_oscillator_period(self):
        mass, k, dt = 1.0, 5.0, 1e-3
        t_true = 2 * math.pi * math.sqrt(mass / (2 * k))
        n_steps = int(10.5 * t_true / dt)
        xs, _, _ = self._oscillator_run(dt, n_steps, mass=mass, k=k)
        # downward zero crossings, refined by linear interpolation
        crossings = []
        for i in range(len(xs) - 1):
            if xs[i] > 0 >= xs[i + 1]:
                frac = xs[i] / (xs[i] - xs[i + 1])
                crossings.append((i + frac) * dt)
        assert len(crossings) >= 10
        period = (crossings[-1] - crossings[0]) / (len(crossings) - 1)
        assert abs(period - t_true) / t_true <= 1e-3

    def test_oscillator_energy_conservation(self):
        mass, k, dt, amp = 1.0, 5.0, 1e-3, 10.0
        t_true = 2 * math.pi * math.sqrt(mass / (2 * k))
        n_steps = int(10 * t_true / dt)
        xs, vs, p = self._oscillator_run(dt, n_steps, mass=mass, k=k, amp=amp)
        energy = 0.5 * mass * vs**2 + k * xs**2
        drift = np.abs(energy - energy[0]).max() / energy[0]
        assert drift <= 5e-3

    def test_rk4_convergence_order(self):
        # phase-space error norm: the position error alone passes near a node
        # of the leading error term and understates the order
        mass, k, amp = 1.0, 5.0, 10.0
        omega0 = math.sqrt(2 * k / mass)
        t_final = 1.0
        errors = []
        for dt in (4e-3, 2e-3, 1e-3):
            xs, vs, _ = self._oscillator_run(dt, round(t_final / dt), mass=mass, k=k, amp=amp)
            ex = xs[-1] - amp * math.cos(omega0 * t_final)
            ev = vs[-1] + amp * omega0 * math.sin(omega0 * t_final)
            errors.append(math.hypot(ex, ev / omega0))
        orders = [math.log2(errors[i] / errors[i + 1]) for i in range(2)]
        assert min(orders) >= 3.5

    def test_kinetic_energy(self):
        assert kinetic_energy(SimState(0, (0, 0), (0.0, 0.0)), explicit()) == 0.0
        assert kinetic_energy(SimState(0, (0, 0), (3.0, 4.0)), explicit(mass=2.0)) == 25.0


class TestSimulateRun:
    def test_stationary_on_uniform_image(self):
        fields = build_fieldset(make_image(kind="uniform"))
        p = explicit(init_pos_sigma=0.0, init_vel_sigma=0.0, duration=0.2)
        tr = simulate_run(fields, p, run_index=0)
        assert np.allclose(tr.pos, tr.pos[0])
        assert np.all(tr.vel == 0.0)
        assert len(tr.t) == 201

    def test_determinism_per_run_index(self, noise_fields):
        p = DynamicsParams(duration=0.1, seed=77)
        a = simulate_run(noise_fields, p, run_index=3)
        b = simulate_run(noise_fields, p, run_index=3)
        assert np.array_equal(a.pos, b.pos)
        assert np.array_equal(a.vel, b.vel)
        c = simulate_run(noise_fields, p, run_index=4)
        assert not np.array_equal(a.pos, c.pos)

    def test_run_order_insensitive(self, noise_fields):
        p = DynamicsParams(duration=0.05, seed=5)
        first = [simulate_run(noise_fields, p, i).pos for i in (0, 1, 2)]
        second = [simulate_run(noise_fields, p, i).pos for i in (2, 1, 0)][::-1]
        for a, b in zip(first, second):
            assert np.array_equal(a, b)

    def test_free_particle_straightness(self):
        fields = ZeroFields(retina=(640, 480))
        p = explicit(dt=1e-3, duration=1.0)
        s = SimState(0.0, (320.0, 240.0), (21.0, -13.0))
        start = np.array(s.x)
        direction = np.array(s.v) / math.hypot(*s.v)
        worst = 0.0
        for _ in range(1000):
            s = rk4_step(s, fields, p)
            rel = np.array(s.x) - start
            perp = abs(rel[0] * direction[1] - rel[1] * direction[0])
            worst = max(worst, perp)
        assert worst <= 1e-9

    def test_topdown_path_bit_identical_when_gamma_zero(self, tmp_path):
        from gazelab.imageio import write_pgm16

        img = make_image(kind="noise", seed=12)
        rng = np.random.default_rng(1)
        write_pgm16(tmp_path / "m.pgm", (rng.uniform(size=(48, 64)) * 65535).astype(np.uint16))
        plain = build_fieldset(img)
        with_map = build_fieldset(img, m_path=tmp_path / "m.pgm")
        p = DynamicsParams(topdown_weight=0.0, duration=0.1, seed=3)
        a = simulate_run(plain, p, run_index=0)
        b = simulate_run(with_map, p, run_index=0)
        assert np.array_equal(a.pos, b.pos)
        assert np.array_equal(a.vel, b.vel)

    def test_no_escape_to_infinity(self):
        # smooth stimulus with fully auto-scaled weights: stays bounded
        w, h = 128, 96
        img = Image(w, h, 1, blob_image(w, h, (88.0, 32.0), sigma=20.0))
        fields = build_fieldset(img)
        p = DynamicsParams(duration=1.0, seed=2)
        bound = 10 * max(fields.retina)
        for i in range(3):
            tr = simulate_run(fields, p, run_index=i)
            assert np.isfinite(tr.pos).all()
            assert np.abs(tr.pos).max() < bound

    def test_attraction_to_bright_blob(self):
        # curiosity force only: runs drift toward an off-center blob
        w, h = 128, 96
        blob_center = np.array([88.0, 32.0])
        img = Image(w, h, 1, blob_image(w, h, blob_center, sigma=20.0))
        fields = build_fieldset(img)
        grad = fields.grad_edge_energy
        eta = 3000.0 / np.hypot(grad[..., 0], grad[..., 1]).max()
        p = DynamicsParams(
            curiosity_weight=eta, invariance_weight=0.0, topdown_weight=0.0,
            duration=2.0, init_vel_sigma=10.0, seed=10,
        )
        closer = 0
        for i in range(20):
            tr = simulate_run(fields, p, run_index=i)
            d_init = np.linalg.norm(tr.pos[0] - blob_center)
            last = tr.pos[tr.t >= tr.t[-1] - 1.0]
            d_final = np.linalg.norm(last - blob_center, axis=1).mean()
            if d_final < d_init:
                closer += 1
        assert closer >= 18

    def test_initial_state_clamped_into_retina(self):
        fields = ZeroFields(retina=(64, 48))
        p = explicit(init_pos_sigma=1e4, init_vel_sigma=0.0, seed=1)
        for i in range(20):
            s = initial_state(fields, p, i)
            assert 0.0 <= s.x[0] <= 64.0
            assert 0.0 <= s.x[1] <= 48.0


class TestTrajectory:
    def test_csv_round_trip(self, tmp_path, noise_fields):
        tr = simulate_run(noise_fields, DynamicsParams(duration=0.05), 0)
        path = tmp_path / "tr.csv"
        tr.to_csv(path)
        back = Trajectory.from_csv(path, noise_fields.retina)
        assert np.allclose(back.pos, tr.pos, atol=1e-6)
        assert back.t[0] == 0.0
        with open(path) as fh:
            assert fh.readline().strip() == "t,x,y,vx,vy"

    def test_sample_count_contract(self, noise_fields):
        tr = simulate_run(noise_fields, DynamicsParams(duration=0.25, dt=1e-3), 0)
        assert len(tr.t) == 251
