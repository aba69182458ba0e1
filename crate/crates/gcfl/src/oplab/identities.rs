//! Commutator-identity verification: the cylinder constructions with dummy
//! factors, the torus construction with its L_z^2 coefficient and pt1-pt3
//! average, the printed second-order torus PDEs, and the symmetrized
//! general-surface equations.
//!
//! Identities with singular coefficients (csc theta, 1/f'_i) are tested
//! against bases multiplied by smooth window functions that vanish outside a
//! declared band; the window is part of the report metadata. Only the
//! circle identity with q = 0 is a hard gate; constructed-q identities
//! produce convergence-documented residual reports.

use super::chart::{Chart, ChartKind};
use super::operator::{
    angular_momentum_z_op, commutator, exp_q_op, geometric_momentum_op, hamiltonian_op, GridOperator,
    GridWavefunction,
};
use crate::error::{Error, Result};
use crate::qfactor::Component;
use crate::surface::SurfaceSpec;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{SQRT_2, TAU};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisWindow {
    pub lo: f64,
    pub hi: f64,
    pub power: u32,
}

impl AxisWindow {
    pub fn new(lo: f64, hi: f64) -> Self {
        AxisWindow { lo, hi, power: 12 }
    }

    fn eval(&self, t: f64) -> f64 {
        if t <= self.lo || t >= self.hi {
            return 0.0;
        }
        let xi = (t - self.lo) / (self.hi - self.lo);
        (std::f64::consts::PI * xi).sin().powi(self.power as i32)
    }
}

/// Window metadata carried in reports.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct WindowSpec {
    pub axis0: Option<AxisWindow>,
    pub axis1: Option<AxisWindow>,
}

impl WindowSpec {
    pub fn field(&self, chart: &Chart) -> Vec<f64> {
        let mut out = Vec::with_capacity(chart.nodes());
        for i0 in 0..chart.n0 {
            let w0 = self.axis0.map_or(1.0, |w| w.eval(chart.coord0[i0]));
            for i1 in 0..chart.n1 {
                let w1 = self.axis1.map_or(1.0, |w| w.eval(chart.coord1[i1]));
                out.push(w0 * w1);
            }
        }
        out
    }
}

/// Fourier mode along the chart axes, multiplied by the window.
pub fn windowed_fourier(
    chart: &Arc<Chart>,
    k0: i64,
    k1: i64,
    window: &WindowSpec,
) -> GridWavefunction {
    let w = window.field(chart);
    let base0 = TAU / chart.axis_period(0);
    let base1 = if chart.n1 > 1 { TAU / chart.axis_period(1) } else { 0.0 };
    let mut values = Vec::with_capacity(chart.nodes());
    for i0 in 0..chart.n0 {
        for i1 in 0..chart.n1 {
            let phase = k0 as f64 * base0 * chart.coord0[i0] + k1 as f64 * base1 * chart.coord1[i1];
            values.push(Complex64::from_polar(1.0, phase) * w[chart.index(i0, i1)]);
        }
    }
    GridWavefunction { chart: chart.clone(), values }
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutatorEntry {
    pub basis: String,
    pub residual_sup: f64,
    pub lhs_sup: f64,
    pub relative_residual: f64,
}

/// Residual report for one identity on one grid. Residuals are sup-norms of
/// (LHS - RHS) psi relative to sup |LHS psi| per basis function.
#[derive(Debug, Clone, Serialize)]
pub struct CommutatorReport {
    pub identity: String,
    pub grid: Vec<usize>,
    pub window: WindowSpec,
    pub entries: Vec<CommutatorEntry>,
    pub max_relative_residual: f64,
}

impl CommutatorReport {
    fn from_entries(identity: String, grid: Vec<usize>, window: WindowSpec, entries: Vec<CommutatorEntry>) -> Self {
        let max_relative_residual = entries.iter().fold(0.0f64, |a, e| a.max(e.relative_residual));
        CommutatorReport { identity, grid, window, entries, max_relative_residual }
    }
}

fn entry_for(
    label: String,
    lhs_op: (&GridOperator, &GridOperator),
    rhs: &GridOperator,
    psi: &GridWavefunction,
) -> Result<CommutatorEntry> {
    let lhs = commutator(lhs_op.0, lhs_op.1, psi)?;
    let rhs_v = rhs.apply(psi)?;
    let diff = lhs.sub(&rhs_v)?;
    let residual_sup = diff.sup_norm();
    let lhs_sup = lhs.sup_norm();
    let relative_residual = if lhs_sup > 1e-300 { residual_sup / lhs_sup } else { residual_sup };
    Ok(CommutatorEntry { basis: label, residual_sup, lhs_sup, relative_residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CylinderVariant {
    /// [p_i, H] = i hbar (e^{-q} (n_i/R) H e^{q} + e^{q} H (n_i/R) e^{-q})
    Eq6,
    /// The three-part average with sqrt(2)-scaled exponents and the primed
    /// Hamiltonian sandwich.
    Eq8,
}

fn n_over_r_field(chart: &Chart, component: Component) -> Vec<f64> {
    let i = match component {
        Component::X => 0,
        Component::Y => 1,
        Component::Z => 2,
    };
    // on curve charts kappa = 2M
    (0..chart.nodes())
        .map(|n| 2.0 * chart.mean_curv[n] * chart.normal[n].component(i))
        .collect()
}

fn cylinder_rhs(
    chart: &Arc<Chart>,
    q: &[f64],
    component: Component,
    variant: CylinderVariant,
) -> GridOperator {
    let h = hamiltonian_op(chart);
    let nr = GridOperator::multiply(chart, n_over_r_field(chart, component));
    let i_hbar = Complex64::new(0.0, chart.hbar);
    match variant {
        CylinderVariant::Eq6 => {
            let a1 = GridOperator::product(vec![
                exp_q_op(chart, q, -1.0),
                nr.clone(),
                h.clone(),
                exp_q_op(chart, q, 1.0),
            ]);
            let a2 = GridOperator::product(vec![exp_q_op(chart, q, 1.0), h, nr, exp_q_op(chart, q, -1.0)]);
            a1.plus(a2).scaled(i_hbar)
        }
        CylinderVariant::Eq8 => {
            let mu = chart.mu;
            let px = geometric_momentum_op(chart, Component::X);
            let py = geometric_momentum_op(chart, Component::Y);
            let part1 = GridOperator::product(vec![
                exp_q_op(chart, q, -SQRT_2),
                nr.clone(),
                h.clone(),
                exp_q_op(chart, q, SQRT_2),
            ])
            .plus(GridOperator::product(vec![
                exp_q_op(chart, q, SQRT_2),
                h.clone(),
                nr.clone(),
                exp_q_op(chart, q, -SQRT_2),
            ]));
            let sandwich = |p: &GridOperator| {
                GridOperator::product(vec![
                    exp_q_op(chart, q, -1.0),
                    p.clone(),
                    exp_q_op(chart, q, 2.0),
                    p.clone(),
                    exp_q_op(chart, q, -1.0),
                ])
            };
            let h_primed = sandwich(&px)
                .plus(sandwich(&py))
                .scaled(Complex64::new(1.0 / (2.0 * mu), 0.0));
            let part2 = nr.clone().after(h_primed.clone()).plus(h_primed.after(nr.clone()));
            let part3_term = |p: &GridOperator| {
                GridOperator::product(vec![
                    exp_q_op(chart, q, 1.0),
                    p.clone(),
                    nr.clone(),
                    exp_q_op(chart, q, -2.0),
                    p.clone(),
                    exp_q_op(chart, q, 1.0),
                ])
            };
            let part3 = part3_term(&px).plus(part3_term(&py)).scaled(Complex64::new(1.0 / mu, 0.0));
            GridOperator::sum(vec![part1, part2, part3]).scaled(i_hbar / 3.0)
        }
    }
}

/// Verify the cylinder dummy-factor identity on a curve chart for both
/// in-plane components over a Fourier basis.
pub fn verify_cylinder_identity(
    chart: &Arc<Chart>,
    q: &[f64],
    variant: CylinderVariant,
    ks: &[i64],
    window: WindowSpec,
) -> Result<CommutatorReport> {
    if !chart.is_curve() {
        return Err(Error::ChartMismatch("cylinder identity needs a curve chart".into()));
    }
    if q.len() != chart.nodes() {
        return Err(Error::Domain("q profile does not cover the chart".into()));
    }
    let h = hamiltonian_op(chart);
    let mut entries = Vec::new();
    for component in [Component::X, Component::Y] {
        let p_i = geometric_momentum_op(chart, component);
        let rhs = cylinder_rhs(chart, q, component, variant);
        for &k in ks {
            let psi = windowed_fourier(chart, k, 0, &window);
            let label = format!("{component:?}:k={k}");
            entries.push(entry_for(label, (&p_i, &h), &rhs, &psi)?);
        }
    }
    let name = match variant {
        CylinderVariant::Eq6 => "cylinder-eq6",
        CylinderVariant::Eq8 => "cylinder-eq8",
    };
    Ok(CommutatorReport::from_entries(
        format!("{name}:{:?}", chart.kind),
        vec![chart.n0],
        window,
        entries,
    ))
}

fn component_index(c: Component) -> usize {
    match c {
        Component::X => 0,
        Component::Y => 1,
        Component::Z => 2,
    }
}

/// RHS of the torus identity for one component: the symmetrized
/// n_i b^3 K^3 L_z^2 / (mu sin^2 theta) coefficient term plus the printed
/// (pt1 + pt2 + pt3)/3 with e^{±sqrt2 q} and e^{±q} placements.
fn torus_rhs_op(chart: &Arc<Chart>, b: f64, q: &[f64], component: Component) -> GridOperator {
    let i = component_index(component);
    let mu = chart.mu;
    let csc2: Vec<f64> = (0..chart.nodes())
        .map(|n| {
            let theta = chart.coord0[n / chart.n1];
            1.0 / (theta.sin() * theta.sin())
        })
        .collect();
    let n_i: Vec<f64> = (0..chart.nodes()).map(|n| chart.normal[n].component(i)).collect();

    let lz = angular_momentum_z_op(chart);
    let lz2 = lz.clone().after(lz);
    let ql = GridOperator::multiply_fn(chart, |n| {
        -n_i[n] * b.powi(3) * chart.gauss_curv[n].powi(3) * csc2[n] / mu
    });
    let term_l = ql
        .clone()
        .after(lz2.clone())
        .plus(lz2.after(ql))
        .scaled(Complex64::new(0.5, 0.0));

    let pz = geometric_momentum_op(chart, Component::Z);
    let pz2 = pz.clone().after(pz.clone());
    let n_csc2 = GridOperator::multiply_fn(chart, |n| n_i[n] * csc2[n]);
    let pz2_over_mub = pz2.clone().scaled(Complex64::new(1.0 / (mu * b), 0.0));
    let pt1 = GridOperator::product(vec![
        exp_q_op(chart, q, -SQRT_2),
        n_csc2.clone(),
        pz2_over_mub.clone(),
        exp_q_op(chart, q, SQRT_2),
    ])
    .plus(GridOperator::product(vec![
        exp_q_op(chart, q, SQRT_2),
        pz2_over_mub,
        exp_q_op(chart, q, -SQRT_2),
        n_csc2.clone(),
    ]))
    .scaled(Complex64::new(-0.5, 0.0));

    let n_csc2_mub = GridOperator::multiply_fn(chart, |n| n_i[n] * csc2[n] / (mu * b));
    let pz2_primed = GridOperator::product(vec![
        exp_q_op(chart, q, -1.0),
        pz.clone(),
        exp_q_op(chart, q, 2.0),
        pz.clone(),
        exp_q_op(chart, q, -1.0),
    ]);
    let pt2 = n_csc2_mub
        .clone()
        .after(pz2_primed.clone())
        .plus(pz2_primed.after(n_csc2_mub.clone()))
        .scaled(Complex64::new(-0.5, 0.0));

    let pt3 = GridOperator::product(vec![
        exp_q_op(chart, q, 1.0),
        pz.clone(),
        n_csc2_mub,
        exp_q_op(chart, q, -2.0),
        pz,
        exp_q_op(chart, q, 1.0),
    ])
    .scaled(Complex64::new(-1.0, 0.0));

    let pts = GridOperator::sum(vec![pt1, pt2, pt3]).scaled(Complex64::new(1.0 / 3.0, 0.0));
    term_l.plus(pts).scaled(Complex64::new(0.0, chart.hbar))
}

/// Broadcast a theta-indexed profile onto the full chart grid.
pub fn broadcast_theta_profile(chart: &Chart, per_theta: &[f64]) -> Vec<f64> {
    assert_eq!(per_theta.len(), chart.n0);
    let mut out = Vec::with_capacity(chart.nodes());
    for i0 in 0..chart.n0 {
        for _ in 0..chart.n1 {
            out.push(per_theta[i0]);
        }
    }
    out
}

/// Verify the torus dummy-factor construction for all three components.
/// q_xy feeds components x and y, q_z feeds z; both are per-node fields.
pub fn verify_torus_identity(
    chart: &Arc<Chart>,
    b: f64,
    q_xy: &[f64],
    q_z: &[f64],
    modes: &[(i64, i64)],
    window: WindowSpec,
) -> Result<CommutatorReport> {
    if chart.kind != ChartKind::Torus {
        return Err(Error::ChartMismatch("torus identity needs a torus chart".into()));
    }
    if window.axis0.is_none() {
        return Err(Error::Domain(
            "torus identity needs a theta window away from the singular bands".into(),
        ));
    }
    let h = hamiltonian_op(chart);
    let mut entries = Vec::new();
    for component in [Component::X, Component::Y, Component::Z] {
        let q = match component {
            Component::X | Component::Y => q_xy,
            Component::Z => q_z,
        };
        let p_i = geometric_momentum_op(chart, component);
        let rhs = torus_rhs_op(chart, b, q, component);
        for &(k, m) in modes {
            let psi = windowed_fourier(chart, k, m, &window);
            let label = format!("{component:?}:k={k},m={m}");
            entries.push(entry_for(label, (&p_i, &h), &rhs, &psi)?);
        }
    }
    Ok(CommutatorReport::from_entries(
        "torus-pt123".into(),
        vec![chart.n0, chart.n1],
        window,
        entries,
    ))
}

/// Derivative data of a dummy-factor candidate on the torus chart.
#[derive(Debug, Clone, Copy, Default)]
pub struct QJet {
    pub q: f64,
    pub q_theta: f64,
    pub q_theta_theta: f64,
    pub q_phi: f64,
    pub q_phi_phi: f64,
}

/// A candidate q(theta, phi) with exact derivatives; residual evaluation
/// never differentiates the candidate numerically.
pub trait TorusQCandidate {
    fn eval(&self, theta: f64, phi: f64) -> QJet;
}

pub struct ZeroCandidate;

impl TorusQCandidate for ZeroCandidate {
    fn eval(&self, _theta: f64, _phi: f64) -> QJet {
        QJet::default()
    }
}

impl<F: Fn(f64, f64) -> QJet> TorusQCandidate for F {
    fn eval(&self, theta: f64, phi: f64) -> QJet {
        self(theta, phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TorusPdeChoice {
    /// PDE from the first RHS choice (second order in theta).
    First,
    /// PDE from the third RHS choice (first order, quadratic in gradients).
    Third,
}

/// Pointwise residual of the printed second-order torus PDEs for q_x.
pub fn residual_torus_secondorder(
    a: f64,
    b: f64,
    candidate: &dyn TorusQCandidate,
    choice: TorusPdeChoice,
    samples: &[(f64, f64)],
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(samples.len());
    for &(theta, phi) in samples {
        let (st, ct) = theta.sin_cos();
        if st.abs() < 1e-9 {
            return Err(Error::SingularEquation {
                equation: "torus second-order PDE".into(),
                coordinate: "theta".into(),
                value: theta,
                detail: "csc(theta) factor diverges".into(),
            });
        }
        let (sp, cp) = phi.sin_cos();
        let jet = candidate.eval(theta, phi);
        let rho3 = (a + b * st).powi(3);
        let r = match choice {
            TorusPdeChoice::Third => {
                8.0 * cp * rho3 * (ct * jet.q_theta - st * jet.q_theta * jet.q_theta)
                    + 8.0 * b.powi(3) * st * st * (sp * jet.q_phi - cp * jet.q_phi * jet.q_phi)
                    - a / st
                        * cp
                        * (6.0 * a * a + 3.0 * b * b + 10.0 * a * b * st
                            + (4.0 * a * a - b * b) * (2.0 * theta).cos()
                            + 6.0 * a * b * (3.0 * theta).sin()
                            - 2.0 * b * b * (4.0 * theta).cos())
            }
            TorusPdeChoice::First => {
                8.0 * cp * rho3 * (jet.q_theta * jet.q_theta + 2.0 * jet.q_theta_theta)
                    - 24.0 * b.powi(3) * st * (sp * jet.q_phi + cp * jet.q_phi * jet.q_phi)
                    - cp / (st * st)
                        * (a * (2.0 * a * a + 3.0 * b * b)
                            + 3.0 * b * (2.0 * a * a - b * b) * st
                            - 3.0 * a * b * b * (2.0 * theta).cos()
                            + b.powi(3) * (3.0 * theta).sin())
            }
        };
        out.push(r);
    }
    Ok(out)
}

/// Verify the symmetrized general-surface equations
/// [p_i, H] = -i hbar (e^{-q_i} n_i B_i p_i^2 e^{q_i} + e^{q_i} p_i^2 n_i B_i e^{-q_i})
/// with B_i the componentwise curly bracket of the surface.
pub fn verify_general_symmetrized(
    spec: &SurfaceSpec,
    chart: &Arc<Chart>,
    q: [&[f64]; 3],
    modes: &[(i64, i64)],
    window: WindowSpec,
) -> Result<CommutatorReport> {
    // componentwise brackets need all partials nonzero on the support
    let w = window.field(chart);
    let mut brackets = vec![[0.0f64; 3]; chart.nodes()];
    for n in 0..chart.nodes() {
        if w[n] == 0.0 {
            continue;
        }
        let p = chart.position[n];
        brackets[n] = crate::dynamics::general_brackets(spec, p)?;
    }
    let h = hamiltonian_op(chart);
    let mut entries = Vec::new();
    for component in [Component::X, Component::Y, Component::Z] {
        let i = component_index(component);
        let qf = q[i];
        if qf.len() != chart.nodes() {
            return Err(Error::Domain("q field does not cover the chart".into()));
        }
        let p_i = geometric_momentum_op(chart, component);
        let p_i2 = p_i.clone().after(p_i.clone());
        let nb = GridOperator::multiply_fn(chart, |n| chart.normal[n].component(i) * brackets[n][i]);
        let rhs = GridOperator::product(vec![
            exp_q_op(chart, qf, -1.0),
            nb.clone(),
            p_i2.clone(),
            exp_q_op(chart, qf, 1.0),
        ])
        .plus(GridOperator::product(vec![
            exp_q_op(chart, qf, 1.0),
            p_i2,
            nb,
            exp_q_op(chart, qf, -1.0),
        ]))
        .scaled(Complex64::new(0.0, -chart.hbar));
        for &(k, m) in modes {
            let psi = windowed_fourier(chart, k, m, &window);
            let label = format!("{component:?}:k={k},m={m}");
            entries.push(entry_for(label, (&p_i, &h), &rhs, &psi)?);
        }
    }
    Ok(CommutatorReport::from_entries(
        "general-symmetrized".into(),
        vec![chart.n0, chart.n1],
        window,
        entries,
    ))
}
