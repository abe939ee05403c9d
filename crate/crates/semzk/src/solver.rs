//! Time evolution of the ZK and SEM equations, the potential solve, and
//! the linearized difference equation.
//!
//! The models, written with the linear part on the left:
//!
//! ```text
//! ZK :  du/dt + dx Delta u + u dx u = 0
//! SEM:  du/dt + dx Delta u + (1/2)(u dx u + dx u dxL u + dy u dyL u) = 0
//! ```
//!
//! with the potential recovered from `Delta phi = dx u` (so `dx phi = dxL u`,
//! `dy phi = dyL u`). Time stepping is an integrating-factor RK4: the stiff
//! dispersive part is advanced exactly by the unitary propagator
//! `exp(i t xi (xi^2+eta^2))`, leaving only the transported nonlinearity to
//! the explicit stages. Quadratic products are dealiased by the 2/3 rule.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Field, SpectralField};
use crate::grid::Grid2D;
use crate::spectral::{
    apply_multiplier, apply_multiplier_real, inverse_transform, transform, MultiplierKind,
};

/// Which evolution problem a configuration refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Model {
    Zk,
    Sem,
    /// The variable-coefficient difference equation. It is evaluated as a
    /// residual functional only and cannot be time-integrated.
    Linearized,
}

/// Conserved functionals of one snapshot.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Conserved {
    /// `integral of u`
    pub mass: f64,
    /// `integral of u^2`
    pub l2: f64,
    /// `integral of (|grad u|^2 / 2 - u^3/6)`, ZK only.
    pub hamiltonian: Option<f64>,
}

/// Evolution configuration.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub model: Model,
    pub dt: f64,
    pub t_end: f64,
    /// Steps between stored snapshots.
    pub snapshot_every: usize,
    /// Dealias quadratic products (2/3 rule). Default true.
    pub dealias: bool,
    /// Accept a dt above the stability heuristic.
    pub override_dt_heuristic: bool,
    /// Abort when a conserved quantity drifts beyond `invariant_tol`
    /// (relative). Off by default.
    pub strict: bool,
    pub invariant_tol: f64,
}

impl SolverConfig {
    pub fn new(model: Model, dt: f64, t_end: f64, snapshot_every: usize) -> Self {
        SolverConfig {
            model,
            dt,
            t_end,
            snapshot_every,
            dealias: true,
            override_dt_heuristic: false,
            strict: false,
            invariant_tol: 1e-6,
        }
    }

    fn validate(&self, u0: &Field) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::BadSolverConfig(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::BadSolverConfig(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        if self.snapshot_every == 0 {
            return Err(Error::BadSolverConfig("snapshot_every must be >= 1".into()));
        }
        if matches!(self.model, Model::Linearized) {
            return Err(Error::ResidualOnlyModel("LINEARIZED"));
        }
        u0.require_finite()?;
        if !self.override_dt_heuristic {
            let limit = dt_heuristic(u0);
            if self.dt > limit {
                return Err(Error::UnstableDt { dt: self.dt, limit });
            }
        }
        Ok(())
    }
}

/// Advective CFL heuristic: `dt <= min(0.1, 0.5/(k_max |u0|_inf + 1))`.
pub fn dt_heuristic(u0: &Field) -> f64 {
    let g = u0.grid();
    let k_max = g
        .kx()
        .iter()
        .chain(g.ky())
        .fold(0.0f64, |m, k| m.max(k.abs()));
    (0.1f64).min(0.5 / (k_max * u0.max_abs() + 1.0))
}

/// Solve `Delta phi = dx u` for the zero-mean potential.
pub fn solve_potential(u: &Field) -> Result<Field> {
    let hat = transform(u)?;
    let grid = u.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut out = hat.coeffs().to_vec();
    for iy in 0..ny {
        let ky = grid.ky()[iy];
        for ix in 0..nx {
            let kx = if ix == nx / 2 { 0.0 } else { grid.kx()[ix] };
            let k2 = grid.kx()[ix] * grid.kx()[ix] + ky * ky;
            let idx = iy * nx + ix;
            if k2 == 0.0 {
                out[idx] = Complex64::new(0.0, 0.0);
            } else {
                // phi_hat = i xi / (-k2) u_hat
                out[idx] *= Complex64::new(0.0, -kx / k2);
            }
        }
    }
    inverse_transform(&SpectralField::from_parts(grid.clone(), out))
}

/// Exact flow of the linear part `du/dt + dx Delta u = 0` over time `t`.
pub fn propagate_linear(u: &Field, t: f64) -> Result<Field> {
    apply_multiplier_real(u, MultiplierKind::Propagator(t))
}

/// Integrating-factor RK4 stepper with precomputed symbol tables.
pub struct Stepper {
    grid: Grid2D,
    model: Model,
    dt: f64,
    dealias: bool,
    ikx: Vec<Complex64>,
    iky: Vec<Complex64>,
    sym_nx: Vec<f64>,
    sym_ny: Vec<f64>,
    e_half: Vec<Complex64>,
    e_full: Vec<Complex64>,
    keep: Vec<bool>,
}

impl Stepper {
    pub fn new(grid: &Grid2D, model: Model, dt: f64, dealias: bool) -> Result<Self> {
        if matches!(model, Model::Linearized) {
            return Err(Error::ResidualOnlyModel("LINEARIZED"));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::BadSolverConfig(format!(
                "dt must be positive, got {dt}"
            )));
        }
        let (nx, ny) = (grid.nx(), grid.ny());
        let n = nx * ny;
        let mut ikx = Vec::with_capacity(n);
        let mut iky = Vec::with_capacity(n);
        let mut sym_nx = Vec::with_capacity(n);
        let mut sym_ny = Vec::with_capacity(n);
        let mut e_half = Vec::with_capacity(n);
        let mut e_full = Vec::with_capacity(n);
        let mut keep = Vec::with_capacity(n);
        let cut_x = nx as f64 / 3.0;
        let cut_y = ny as f64 / 3.0;
        for iy in 0..ny {
            let nyq_y = iy == ny / 2;
            let ky = grid.ky()[iy];
            let my = Grid2D::freq_index(iy, ny).unsigned_abs() as f64;
            for ix in 0..nx {
                let nyq_x = ix == nx / 2;
                let kx = grid.kx()[ix];
                ikx.push(MultiplierKind::Dx.symbol(kx, ky, nyq_x, nyq_y));
                iky.push(MultiplierKind::Dy.symbol(kx, ky, nyq_x, nyq_y));
                sym_nx.push(MultiplierKind::NonlocalX.symbol(kx, ky, nyq_x, nyq_y).re);
                sym_ny.push(MultiplierKind::NonlocalY.symbol(kx, ky, nyq_x, nyq_y).re);
                e_half.push(MultiplierKind::Propagator(0.5 * dt).symbol(kx, ky, nyq_x, nyq_y));
                e_full.push(MultiplierKind::Propagator(dt).symbol(kx, ky, nyq_x, nyq_y));
                let mx = Grid2D::freq_index(ix, nx).unsigned_abs() as f64;
                keep.push(!(mx > cut_x || my > cut_y));
            }
        }
        Ok(Stepper {
            grid: grid.clone(),
            model,
            dt,
            dealias,
            ikx,
            iky,
            sym_nx,
            sym_ny,
            e_half,
            e_full,
            keep,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn fft(&self, real: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = real.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        crate::spectral::fft2_raw(&mut buf, self.grid.nx(), self.grid.ny(), true);
        buf
    }

    fn ifft(&self, hat: &[Complex64]) -> Vec<f64> {
        let mut buf = hat.to_vec();
        crate::spectral::fft2_raw(&mut buf, self.grid.nx(), self.grid.ny(), false);
        let scale = 1.0 / self.grid.len() as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    fn ifft_scaled(&self, hat: &[Complex64], sym: &[Complex64]) -> Vec<f64> {
        let mut buf: Vec<Complex64> = hat.iter().zip(sym).map(|(h, s)| h * s).collect();
        crate::spectral::fft2_raw(&mut buf, self.grid.nx(), self.grid.ny(), false);
        let scale = 1.0 / self.grid.len() as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    fn ifft_scaled_real(&self, hat: &[Complex64], sym: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex64> = hat.iter().zip(sym).map(|(h, s)| h * s).collect();
        crate::spectral::fft2_raw(&mut buf, self.grid.nx(), self.grid.ny(), false);
        let scale = 1.0 / self.grid.len() as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Spectral nonlinear term `N(u_hat) = -F(nonlinearity)`, dealiased.
    pub(crate) fn nonlinear(&self, hat: &[Complex64]) -> Vec<Complex64> {
        let mut out = match self.model {
            Model::Zk => {
                // u dx u = dx(u^2)/2 in conservative form.
                let u = self.ifft(hat);
                let sq: Vec<f64> = u.iter().map(|v| v * v).collect();
                let mut sq_hat = self.fft(&sq);
                for (i, c) in sq_hat.iter_mut().enumerate() {
                    *c *= -0.5 * self.ikx[i];
                }
                sq_hat
            }
            Model::Sem => {
                let u = self.ifft(hat);
                let ux = self.ifft_scaled(hat, &self.ikx);
                let uy = self.ifft_scaled(hat, &self.iky);
                let lx = self.ifft_scaled_real(hat, &self.sym_nx);
                let ly = self.ifft_scaled_real(hat, &self.sym_ny);
                let prod: Vec<f64> = (0..u.len())
                    .map(|i| -0.5 * (u[i] * ux[i] + ux[i] * lx[i] + uy[i] * ly[i]))
                    .collect();
                self.fft(&prod)
            }
            Model::Linearized => unreachable!("rejected in constructor"),
        };
        if self.dealias {
            for (c, keep) in out.iter_mut().zip(&self.keep) {
                if !keep {
                    *c = Complex64::new(0.0, 0.0);
                }
            }
        }
        out
    }

    /// One integrating-factor RK4 step in spectral space.
    pub fn step_spectral(&self, hat: &[Complex64]) -> Vec<Complex64> {
        let n = hat.len();
        let h = self.dt;
        let k1 = self.nonlinear(hat);

        let mut stage: Vec<Complex64> = (0..n)
            .map(|i| self.e_half[i] * (hat[i] + 0.5 * h * k1[i]))
            .collect();
        let k2 = self.nonlinear(&stage);

        for i in 0..n {
            stage[i] = self.e_half[i] * hat[i] + 0.5 * h * k2[i];
        }
        let k3 = self.nonlinear(&stage);

        for i in 0..n {
            stage[i] = self.e_full[i] * hat[i] + h * self.e_half[i] * k3[i];
        }
        let k4 = self.nonlinear(&stage);

        (0..n)
            .map(|i| {
                self.e_full[i] * hat[i]
                    + (h / 6.0)
                        * (self.e_full[i] * k1[i] + 2.0 * self.e_half[i] * (k2[i] + k3[i]) + k4[i])
            })
            .collect()
    }
}

/// The right-hand side `du/dt = -dx Delta u - N(u)` for ZK/SEM.
pub fn rhs(u: &Field, model: Model) -> Result<Field> {
    u.require_finite()?;
    let hat = transform(u)?;
    let mut lin_hat = apply_multiplier(&hat, MultiplierKind::DxLaplacian)?;
    for c in lin_hat.coeffs_mut() {
        *c = -*c;
    }
    let linear = inverse_transform(&lin_hat)?;
    let stepper = Stepper::new(u.grid(), model, 1.0, true)?;
    let n_hat = stepper.nonlinear(hat.coeffs());
    let nl = inverse_transform(&SpectralField::from_parts(u.grid().clone(), n_hat))?;
    let mut out = linear;
    out.add_scaled(&nl, 1.0)?;
    Ok(out)
}

/// One explicit integrating-factor RK4 step on a real-space field.
pub fn step(u: &Field, dt: f64, model: Model) -> Result<Field> {
    u.require_finite()?;
    let stepper = Stepper::new(u.grid(), model, dt, true)?;
    let hat = transform(u)?;
    let next = stepper.step_spectral(hat.coeffs());
    let out = inverse_transform(&SpectralField::from_parts(u.grid().clone(), next))?;
    if !out.is_finite() {
        return Err(Error::NanDetected {
            step: 0,
            max_abs: u.max_abs(),
        });
    }
    Ok(out)
}

/// Conserved functionals: mass, L2 mass, and (ZK) the Hamiltonian.
pub fn conserved(u: &Field, model: Model) -> Result<Conserved> {
    u.require_finite()?;
    let mass = u.mass();
    let l2 = u.data().iter().map(|v| v * v).sum::<f64>() * u.grid().cell_area();
    let hamiltonian = match model {
        Model::Zk => {
            let ux = apply_multiplier_real(u, MultiplierKind::Dx)?;
            let uy = apply_multiplier_real(u, MultiplierKind::Dy)?;
            let h: f64 = (0..u.data().len())
                .map(|i| {
                    0.5 * (ux.data()[i] * ux.data()[i] + uy.data()[i] * uy.data()[i])
                        - u.data()[i].powi(3) / 6.0
                })
                .sum::<f64>()
                * u.grid().cell_area();
            Some(h)
        }
        _ => None,
    };
    Ok(Conserved {
        mass,
        l2,
        hamiltonian,
    })
}

/// Snapshots of one evolution, immutable after creation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    snapshots: Vec<Field>,
    invariant_log: Vec<Conserved>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[Field] {
        &self.snapshots
    }

    pub fn invariant_log(&self) -> &[Conserved] {
        &self.invariant_log
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn grid(&self) -> &Grid2D {
        self.snapshots[0].grid()
    }

    /// Uniform snapshot spacing, or an error when the ladder is uneven.
    pub fn uniform_dt(&self) -> Result<f64> {
        if self.times.len() < 2 {
            return Err(Error::TooFewSnapshots {
                need: 2,
                got: self.times.len(),
            });
        }
        let dt = self.times[1] - self.times[0];
        for w in self.times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1e-12) {
                return Err(Error::TrajectoryMismatch);
            }
        }
        Ok(dt)
    }

    /// Pointwise difference `self - other` (same grid and time ladder).
    pub fn difference(&self, other: &Trajectory) -> Result<Trajectory> {
        if self.times.len() != other.times.len()
            || !self.grid().same_layout(other.grid())
            || self
                .times
                .iter()
                .zip(&other.times)
                .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()))
        {
            return Err(Error::TrajectoryMismatch);
        }
        let snapshots: Result<Vec<Field>> = self
            .snapshots
            .iter()
            .zip(&other.snapshots)
            .map(|(a, b)| a.sub(b))
            .collect();
        Trajectory::from_snapshots_internal(self.times.clone(), snapshots?)
    }

    /// Assemble a trajectory from precomputed snapshots (ascending times).
    pub fn from_snapshots(times: Vec<f64>, snapshots: Vec<Field>) -> Result<Trajectory> {
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::TrajectoryMismatch);
        }
        Trajectory::from_snapshots_internal(times, snapshots)
    }

    fn from_snapshots_internal(times: Vec<f64>, snapshots: Vec<Field>) -> Result<Trajectory> {
        if times.len() != snapshots.len() || times.is_empty() {
            return Err(Error::TrajectoryMismatch);
        }
        let grid = snapshots[0].grid().clone();
        if snapshots.iter().any(|s| !s.grid().same_layout(&grid)) {
            return Err(Error::TrajectoryMismatch);
        }
        let invariant_log = snapshots
            .iter()
            .map(|f| Conserved {
                mass: f.mass(),
                l2: f.l2_norm().powi(2),
                hamiltonian: None,
            })
            .collect();
        Ok(Trajectory {
            times,
            snapshots,
            invariant_log,
        })
    }
}

/// Evolve initial data under the configured model.
pub fn evolve(u0: &Field, config: &SolverConfig) -> Result<Trajectory> {
    config.validate(u0)?;
    let n_steps = if config.t_end == 0.0 {
        0
    } else {
        (config.t_end / config.dt).round().max(1.0) as usize
    };
    // Land exactly on t_end with a uniform ladder.
    let dt = if n_steps == 0 {
        config.dt
    } else {
        config.t_end / n_steps as f64
    };
    let stepper = Stepper::new(u0.grid(), config.model, dt, config.dealias)?;

    let mut times = Vec::new();
    let mut snapshots = Vec::new();
    let mut invariant_log = Vec::new();
    let initial = conserved(u0, config.model)?;

    let mut record = |step_idx: usize, field: &Field| -> Result<()> {
        let inv = conserved(field, config.model)?;
        if config.strict {
            let t = step_idx as f64 * dt;
            for (name, now, then) in [("mass", inv.mass, initial.mass), ("l2", inv.l2, initial.l2)]
            {
                let scale = then.abs().max(1e-30);
                let drift = ((now - then) / scale).abs();
                if drift > config.invariant_tol {
                    return Err(Error::InvariantDrift {
                        name,
                        drift,
                        tol: config.invariant_tol,
                        t,
                    });
                }
            }
        }
        times.push(step_idx as f64 * dt);
        snapshots.push(field.clone());
        invariant_log.push(inv);
        Ok(())
    };

    record(0, u0)?;
    let mut hat = transform(u0)?.coeffs().to_vec();
    for s in 1..=n_steps {
        hat = stepper.step_spectral(&hat);
        if hat.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            let max_abs = hat.iter().fold(0.0f64, |m, c| m.max(c.norm()));
            return Err(Error::NanDetected { step: s, max_abs });
        }
        if s % config.snapshot_every == 0 || s == n_steps {
            let field =
                inverse_transform(&SpectralField::from_parts(u0.grid().clone(), hat.clone()))?;
            record(s, &field)?;
        }
    }

    Ok(Trajectory {
        times,
        snapshots,
        invariant_log,
    })
}

/// The five variable coefficients of the linearized difference equation,
/// sampled on the trajectory's time ladder.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    pub times: Vec<f64>,
    pub a1: Vec<Field>,
    pub b1: Vec<Field>,
    pub a0: Vec<Field>,
    pub b0: Vec<Field>,
    pub c0: Vec<Field>,
}

/// Coefficient identification from a solution pair:
/// `a1 = (u1 + dxL u2)/2`, `b1 = (dyL u2)/2`, `a0 = (dx u1)/2`,
/// `b0 = (dy u1)/2`, `c0 = (dx u2)/2`.
pub fn linearized_coefficients(u1: &Trajectory, u2: &Trajectory) -> Result<CoefficientSet> {
    if u1.len() != u2.len()
        || !u1.grid().same_layout(u2.grid())
        || u1
            .times()
            .iter()
            .zip(u2.times())
            .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()))
    {
        return Err(Error::TrajectoryMismatch);
    }
    let mut set = CoefficientSet {
        times: u1.times().to_vec(),
        a1: Vec::with_capacity(u1.len()),
        b1: Vec::with_capacity(u1.len()),
        a0: Vec::with_capacity(u1.len()),
        b0: Vec::with_capacity(u1.len()),
        c0: Vec::with_capacity(u1.len()),
    };
    for (f1, f2) in u1.snapshots().iter().zip(u2.snapshots()) {
        let mut a1 = apply_multiplier_real(f2, MultiplierKind::NonlocalX)?;
        a1.add_scaled(f1, 1.0)?;
        a1.scale(0.5);
        let mut b1 = apply_multiplier_real(f2, MultiplierKind::NonlocalY)?;
        b1.scale(0.5);
        let mut a0 = apply_multiplier_real(f1, MultiplierKind::Dx)?;
        a0.scale(0.5);
        let mut b0 = apply_multiplier_real(f1, MultiplierKind::Dy)?;
        b0.scale(0.5);
        let mut c0 = apply_multiplier_real(f2, MultiplierKind::Dx)?;
        c0.scale(0.5);
        set.a1.push(a1);
        set.b1.push(b1);
        set.a0.push(a0);
        set.b0.push(b0);
        set.c0.push(c0);
    }
    Ok(set)
}

/// L2 residual of the linearized equation
/// `dv/dt + dx Delta v + a1 dx v + b1 dy v + a0 dxL v + b0 dyL v + c0 v`
/// at interior snapshot times, `dv/dt` by centered differences.
pub fn residual_eq_v(v: &Trajectory, coeffs: &CoefficientSet) -> Result<Vec<(f64, f64)>> {
    if v.len() < 3 {
        return Err(Error::TooFewSnapshots {
            need: 3,
            got: v.len(),
        });
    }
    if coeffs.times.len() != v.len()
        || coeffs
            .times
            .iter()
            .zip(v.times())
            .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()))
    {
        return Err(Error::TrajectoryMismatch);
    }
    let dt = v.uniform_dt()?;
    let mut out = Vec::with_capacity(v.len() - 2);
    for i in 1..v.len() - 1 {
        let vi = &v.snapshots()[i];
        let mut lhs = v.snapshots()[i + 1].sub(&v.snapshots()[i - 1])?;
        lhs.scale(1.0 / (2.0 * dt));
        let disp = apply_multiplier_real(vi, MultiplierKind::DxLaplacian)?;
        lhs.add_scaled(&disp, 1.0)?;
        let vx = apply_multiplier_real(vi, MultiplierKind::Dx)?;
        let vy = apply_multiplier_real(vi, MultiplierKind::Dy)?;
        let vlx = apply_multiplier_real(vi, MultiplierKind::NonlocalX)?;
        let vly = apply_multiplier_real(vi, MultiplierKind::NonlocalY)?;
        lhs.add_scaled(&coeffs.a1[i].mul(&vx)?, 1.0)?;
        lhs.add_scaled(&coeffs.b1[i].mul(&vy)?, 1.0)?;
        lhs.add_scaled(&coeffs.a0[i].mul(&vlx)?, 1.0)?;
        lhs.add_scaled(&coeffs.b0[i].mul(&vly)?, 1.0)?;
        lhs.add_scaled(&coeffs.c0[i].mul(vi)?, 1.0)?;
        out.push((v.times()[i], lhs.l2_norm()));
    }
    Ok(out)
}
