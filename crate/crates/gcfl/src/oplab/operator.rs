//! Grid operators: composition trees of multiply-by-real-function, spectral
//! differentiation, complex scaling, sums and products, applied to complex
//! wavefunctions on a chart.

use super::chart::Chart;
use crate::error::{Error, Result};
use crate::qfactor::Component;
use num_complex::Complex64;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct GridWavefunction {
    pub chart: Arc<Chart>,
    pub values: Vec<Complex64>,
}

impl GridWavefunction {
    pub fn new(chart: Arc<Chart>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != chart.nodes() {
            return Err(Error::ChartMismatch(format!(
                "wavefunction has {} samples, chart has {} nodes",
                values.len(),
                chart.nodes()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Eval("wavefunction contains non-finite samples".into()));
        }
        Ok(GridWavefunction { chart, values })
    }

    pub fn from_fn(chart: &Arc<Chart>, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(chart.nodes());
        for i0 in 0..chart.n0 {
            for i1 in 0..chart.n1 {
                values.push(f(chart.coord0[i0], chart.coord1[i1]));
            }
        }
        GridWavefunction { chart: chart.clone(), values }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.norm()))
    }

    pub fn sub(&self, rhs: &GridWavefunction) -> Result<GridWavefunction> {
        same_chart(&self.chart, &rhs.chart)?;
        let values = self.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect();
        Ok(GridWavefunction { chart: self.chart.clone(), values })
    }
}

fn same_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> Result<()> {
    if Arc::ptr_eq(a, b) {
        Ok(())
    } else {
        Err(Error::ChartMismatch("operands live on different charts".into()))
    }
}

#[derive(Debug, Clone)]
enum OpNode {
    Identity,
    MultiplyReal(Arc<Vec<f64>>),
    Differentiate { axis: usize, order: u32 },
    Scale(Complex64, Box<OpNode>),
    Sum(Vec<OpNode>),
    /// Composition; the rightmost factor acts first.
    Product(Vec<OpNode>),
}

impl OpNode {
    fn apply(&self, chart: &Chart, input: &[Complex64]) -> Vec<Complex64> {
        match self {
            OpNode::Identity => input.to_vec(),
            OpNode::MultiplyReal(f) => input.iter().zip(f.iter()).map(|(v, w)| v * w).collect(),
            OpNode::Differentiate { axis, order } => {
                let mut out = input.to_vec();
                chart.differentiate(&mut out, *axis, *order);
                out
            }
            OpNode::Scale(c, inner) => {
                let mut out = inner.apply(chart, input);
                for v in &mut out {
                    *v *= c;
                }
                out
            }
            OpNode::Sum(terms) => {
                let mut acc = vec![Complex64::new(0.0, 0.0); input.len()];
                for t in terms {
                    let part = t.apply(chart, input);
                    for (a, p) in acc.iter_mut().zip(part) {
                        *a += p;
                    }
                }
                acc
            }
            OpNode::Product(factors) => {
                let mut cur = input.to_vec();
                for f in factors.iter().rev() {
                    cur = f.apply(chart, &cur);
                }
                cur
            }
        }
    }
}

/// A linear operator bound to a chart.
#[derive(Debug, Clone)]
pub struct GridOperator {
    chart: Arc<Chart>,
    node: OpNode,
}

impl GridOperator {
    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn identity(chart: &Arc<Chart>) -> Self {
        GridOperator { chart: chart.clone(), node: OpNode::Identity }
    }

    /// Pointwise multiplication by a real field given per node.
    pub fn multiply(chart: &Arc<Chart>, field: Vec<f64>) -> Self {
        assert_eq!(field.len(), chart.nodes(), "field length must match the chart");
        GridOperator { chart: chart.clone(), node: OpNode::MultiplyReal(Arc::new(field)) }
    }

    pub fn multiply_fn(chart: &Arc<Chart>, f: impl Fn(usize) -> f64) -> Self {
        Self::multiply(chart, (0..chart.nodes()).map(f).collect())
    }

    pub fn differentiate(chart: &Arc<Chart>, axis: usize, order: u32) -> Self {
        assert!(axis == 0 || (axis == 1 && chart.n1 > 1), "invalid axis for this chart");
        GridOperator { chart: chart.clone(), node: OpNode::Differentiate { axis, order } }
    }

    pub fn scaled(self, c: Complex64) -> Self {
        GridOperator { chart: self.chart.clone(), node: OpNode::Scale(c, Box::new(self.node)) }
    }

    pub fn plus(self, rhs: GridOperator) -> Self {
        same_chart(&self.chart, &rhs.chart).expect("operator sum across charts");
        GridOperator { chart: self.chart.clone(), node: OpNode::Sum(vec![self.node, rhs.node]) }
    }

    /// self after rhs: (self.then_after(rhs)) psi = self(rhs(psi)).
    pub fn after(self, rhs: GridOperator) -> Self {
        same_chart(&self.chart, &rhs.chart).expect("operator product across charts");
        GridOperator { chart: self.chart.clone(), node: OpNode::Product(vec![self.node, rhs.node]) }
    }

    pub fn sum(terms: Vec<GridOperator>) -> Self {
        let chart = terms.first().expect("sum of no operators").chart.clone();
        for t in &terms {
            same_chart(&chart, &t.chart).expect("operator sum across charts");
        }
        GridOperator { chart, node: OpNode::Sum(terms.into_iter().map(|t| t.node).collect()) }
    }

    /// Composition product; the last element acts first.
    pub fn product(factors: Vec<GridOperator>) -> Self {
        let chart = factors.first().expect("product of no operators").chart.clone();
        for f in &factors {
            same_chart(&chart, &f.chart).expect("operator product across charts");
        }
        GridOperator { chart, node: OpNode::Product(factors.into_iter().map(|f| f.node).collect()) }
    }

    pub fn apply(&self, psi: &GridWavefunction) -> Result<GridWavefunction> {
        same_chart(&self.chart, &psi.chart)?;
        let values = self.node.apply(&self.chart, &psi.values);
        Ok(GridWavefunction { chart: psi.chart.clone(), values })
    }
}

fn component_index(c: Component) -> usize {
    match c {
        Component::X => 0,
        Component::Y => 1,
        Component::Z => 2,
    }
}

/// Geometric momentum component: -i hbar (t_i d/ds + M n_i) on curves,
/// -i hbar ((grad_Sigma)_i + M n_i) on surface charts.
pub fn geometric_momentum_op(chart: &Arc<Chart>, component: Component) -> GridOperator {
    let i = component_index(component);
    let mut terms = Vec::new();
    let d0 = GridOperator::differentiate(chart, 0, 1);
    let c0 = GridOperator::multiply_fn(chart, |n| chart.frame0[n].component(i) * chart.inv_h0[n]);
    terms.push(c0.after(d0));
    if chart.n1 > 1 {
        let d1 = GridOperator::differentiate(chart, 1, 1);
        let c1 = GridOperator::multiply_fn(chart, |n| chart.frame1[n].component(i) * chart.inv_h1[n]);
        terms.push(c1.after(d1));
    }
    terms.push(GridOperator::multiply_fn(chart, |n| {
        chart.mean_curv[n] * chart.normal[n].component(i)
    }));
    GridOperator::sum(terms).scaled(Complex64::new(0.0, -chart.hbar))
}

/// Surface Hamiltonian -(hbar^2 / 2 mu)(Laplace-Beltrami + M^2 - K).
pub fn hamiltonian_op(chart: &Arc<Chart>) -> GridOperator {
    let mut terms = Vec::new();
    let d00 = GridOperator::differentiate(chart, 0, 2);
    terms.push(GridOperator::multiply_fn(chart, |n| chart.inv_h0[n] * chart.inv_h0[n]).after(d00));
    if chart.n1 > 1 {
        let d0 = GridOperator::differentiate(chart, 0, 1);
        terms.push(GridOperator::multiply_fn(chart, |n| chart.lap_drift[n]).after(d0));
        let d11 = GridOperator::differentiate(chart, 1, 2);
        terms.push(GridOperator::multiply_fn(chart, |n| chart.inv_h1[n] * chart.inv_h1[n]).after(d11));
    }
    terms.push(GridOperator::multiply_fn(chart, |n| {
        let m = chart.mean_curv[n];
        m * m - chart.gauss_curv[n]
    }));
    let scale = -chart.hbar * chart.hbar / (2.0 * chart.mu);
    GridOperator::sum(terms).scaled(Complex64::new(scale, 0.0))
}

/// z-component of angular momentum on an axisymmetric surface chart:
/// x p_y - y p_x = -i hbar d/dphi.
pub fn angular_momentum_z_op(chart: &Arc<Chart>) -> GridOperator {
    GridOperator::differentiate(chart, 1, 1).scaled(Complex64::new(0.0, -chart.hbar))
}

/// Multiplication by exp(factor * q) for a per-node dummy-factor field.
pub fn exp_q_op(chart: &Arc<Chart>, q: &[f64], factor: f64) -> GridOperator {
    assert_eq!(q.len(), chart.nodes());
    GridOperator::multiply_fn(chart, |n| (factor * q[n]).exp())
}

/// Multiplication by a Cartesian coordinate of the embedding.
pub fn position_op(chart: &Arc<Chart>, component: Component) -> GridOperator {
    let i = component_index(component);
    GridOperator::multiply_fn(chart, |n| chart.position[n].component(i))
}

/// A(B psi) - B(A psi).
pub fn commutator(a: &GridOperator, b: &GridOperator, psi: &GridWavefunction) -> Result<GridWavefunction> {
    same_chart(a.chart(), b.chart())?;
    let ab = a.apply(&b.apply(psi)?)?;
    let ba = b.apply(&a.apply(psi)?)?;
    ab.sub(&ba)
}

/// Largest normalized symmetry defect |<phi, A psi> - <A phi, psi>| over all
/// ordered pairs from the basis.
pub fn hermiticity_defect(op: &GridOperator, basis: &[GridWavefunction]) -> Result<f64> {
    let chart = op.chart();
    let mut op_norm = 0.0f64;
    let mut applied = Vec::with_capacity(basis.len());
    for psi in basis {
        let a = op.apply(psi)?;
        let n = chart.norm(&psi.values);
        if n > 0.0 {
            op_norm = op_norm.max(chart.norm(&a.values) / n);
        }
        applied.push(a);
    }
    let scale = op_norm.max(1e-300);
    let mut worst = 0.0f64;
    for (i, phi) in basis.iter().enumerate() {
        for (j, psi) in basis.iter().enumerate() {
            let lhs = chart.inner(&phi.values, &applied[j].values);
            let rhs = chart.inner(&applied[i].values, &psi.values);
            let denom = chart.norm(&phi.values) * chart.norm(&psi.values) * scale;
            if denom > 0.0 {
                worst = worst.max((lhs - rhs).norm() / denom);
            }
        }
    }
    Ok(worst)
}
