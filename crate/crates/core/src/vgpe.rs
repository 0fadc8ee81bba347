//! M-component stepper with an arbitrary symmetric interaction matrix and a
//! drive `g(t) B` coupling the components.
//!
//! The linear substep is solved in sine-coefficient space. With
//! `B = D^{-1} Lambda D` the drive over `[t_n, t_n + tau]` is the constant
//! matrix `D^{-1} exp(-i Lambda G) D`, `G = int g`, applied at every mode
//! together with the free factor `exp(-i tau symbol / 2)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use ndarray::Array3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{DstScratch, GridSpec, SinePlan};
use crate::rotating::{simpson, PotentialSpec, DEFAULT_SIMPSON_PANELS};
use crate::splitting::{self, kinetic_factors, phase_step, NodeCoordinates, SplitStepper};
use crate::state::{CoupledState, Model};

type EnvelopeFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Scalar drive envelope `g(t)`.
#[derive(Clone)]
pub enum Envelope {
    Constant(f64),
    /// Integrated with composite Simpson over each substep.
    Function { f: Arc<EnvelopeFn>, panels: usize },
}

impl Envelope {
    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Envelope::Function {
            f: Arc::new(f),
            panels: DEFAULT_SIMPSON_PANELS,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Envelope::Constant(g) => *g,
            Envelope::Function { f, .. } => f(t),
        }
    }

    /// `int_{t0}^{t1} g`, oriented.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        match self {
            Envelope::Constant(g) => g * (t1 - t0),
            Envelope::Function { f, panels } => simpson(|t| f(t), t0, t1, *panels),
        }
    }
}

impl fmt::Debug for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Envelope::Constant(g) => f.debug_tuple("Constant").field(g).finish(),
            Envelope::Function { panels, .. } => f
                .debug_struct("Function")
                .field("panels", panels)
                .finish_non_exhaustive(),
        }
    }
}

/// The coupling term `g(t) B`.
#[derive(Debug, Clone)]
pub struct Drive {
    pub matrix: DMatrix<f64>,
    pub envelope: Envelope,
}

#[derive(Debug, Clone)]
pub struct VgpeParams {
    /// Symmetric `M x M` interaction matrix.
    pub beta: Vec<Vec<f64>>,
    pub omega: f64,
    pub dt: f64,
    /// One trap per component.
    pub potentials: Vec<PotentialSpec>,
    pub drive: Drive,
}

impl VgpeParams {
    pub fn component_count(&self) -> usize {
        self.beta.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.beta.len();
        if m < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 components, got {m}")));
        }
        if self.beta.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidParameter("beta must be square".into()));
        }
        if self.beta.iter().flatten().any(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter("non-finite beta entry".into()));
        }
        for j in 0..m {
            for k in 0..j {
                if self.beta[j][k] != self.beta[k][j] {
                    return Err(Error::InvalidParameter(format!(
                        "beta_{}{} = {} and beta_{}{} = {} differ",
                        j + 1,
                        k + 1,
                        self.beta[j][k],
                        k + 1,
                        j + 1,
                        self.beta[k][j]
                    )));
                }
            }
        }
        if self.potentials.len() != m {
            return Err(Error::InvalidParameter(format!(
                "{} potentials for {m} components",
                self.potentials.len()
            )));
        }
        let b = &self.drive.matrix;
        if b.nrows() != m || b.ncols() != m {
            return Err(Error::InvalidParameter(format!(
                "drive matrix is {}x{}, expected {m}x{m}",
                b.nrows(),
                b.ncols()
            )));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite drive matrix entry".into()));
        }
        if !(self.omega.is_finite() && self.dt.is_finite()) {
            return Err(Error::InvalidParameter("non-finite omega or dt".into()));
        }
        if self.dt <= 0.0 {
            return Err(Error::InvalidParameter(format!("dt = {} must be positive", self.dt)));
        }
        Ok(())
    }
}

impl Model for VgpeParams {
    fn component_count(&self) -> usize {
        self.beta.len()
    }

    fn omega(&self) -> f64 {
        self.omega
    }

    fn beta(&self, j: usize, k: usize) -> f64 {
        self.beta[j][k]
    }

    fn potential(&self, j: usize) -> &PotentialSpec {
        &self.potentials[j]
    }

    fn coupling(&self, j: usize, k: usize, t: f64) -> f64 {
        self.drive.envelope.value(t) * self.drive.matrix[(j, k)]
    }
}

/// `B = D^{-1} Lambda D` with real `Lambda`.
#[derive(Debug, Clone)]
pub struct CouplingDecomposition {
    d: DMatrix<f64>,
    d_inv: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    residual: f64,
}

impl CouplingDecomposition {
    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn d_inv(&self) -> &DMatrix<f64> {
        &self.d_inv
    }

    /// Diagonal of `Lambda`.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// `max |D^{-1} Lambda D - B|`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Two-norm condition number of `D`.
    pub fn condition(&self) -> f64 {
        let sv = self.d.clone().singular_values();
        sv.max() / sv.min()
    }

    /// `D^{-1} exp(-i Lambda g) D`.
    pub fn propagator(&self, g: f64) -> DMatrix<Complex64> {
        let m = self.eigenvalues.len();
        DMatrix::from_fn(m, m, |j, k| {
            (0..m)
                .map(|l| {
                    Complex64::from_polar(self.d_inv[(j, l)] * self.d[(l, k)], -self.eigenvalues[l] * g)
                })
                .sum()
        })
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Real eigendecomposition of the drive matrix. Diagonal `B` gives `D = I`;
/// otherwise eigenvalues are sorted ascending.
pub fn decompose_coupling(b: &DMatrix<f64>) -> Result<CouplingDecomposition> {
    let m = b.nrows();
    if m == 0 || b.ncols() != m {
        return Err(Error::Coupling(format!(
            "drive matrix must be square, got {}x{}",
            b.nrows(),
            b.ncols()
        )));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Coupling("drive matrix has non-finite entries".into()));
    }
    let scale = 1.0 + max_abs(b);

    let is_diagonal = (0..m).all(|j| (0..m).all(|k| j == k || b[(j, k)] == 0.0));
    let (eigenvalues, v) = if is_diagonal {
        (b.diagonal(), DMatrix::identity(m, m))
    } else if *b == b.transpose() {
        let eig = b.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
        let values = DVector::from_fn(m, |i, _| eig.eigenvalues[order[i]]);
        let vectors = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
        (values, vectors)
    } else {
        general_eigenvectors(b, scale)?
    };

    let d_inv = v;
    let d = d_inv.clone().try_inverse().ok_or_else(|| {
        Error::Coupling("eigenvector matrix is singular".into())
    })?;
    let rebuilt = &d_inv * DMatrix::from_diagonal(&eigenvalues) * &d;
    let residual = max_abs(&(rebuilt - b));
    if !(residual <= 1e-10 * scale) {
        return Err(Error::Coupling(format!(
            "reconstruction residual {residual:e} exceeds {:e}",
            1e-10 * scale
        )));
    }
    Ok(CouplingDecomposition {
        d,
        d_inv,
        eigenvalues,
        residual,
    })
}

/// Eigenvalues from the Schur form, eigenvectors as SVD null spaces of
/// `B - mu I` for each cluster of equal eigenvalues.
fn general_eigenvectors(b: &DMatrix<f64>, scale: f64) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let m = b.nrows();
    let spectrum = b.clone().complex_eigenvalues();
    if let Some(z) = spectrum.iter().find(|z| z.im.abs() > 1e-10 * scale) {
        return Err(Error::Coupling(format!(
            "drive matrix has complex eigenvalue {} {:+}i",
            z.re, z.im
        )));
    }
    let mut values: Vec<f64> = spectrum.iter().map(|z| z.re).collect();
    values.sort_by(f64::total_cmp);

    let cluster_tol = 1e-8 * scale;
    let mut columns = Vec::with_capacity(m);
    let mut sorted = Vec::with_capacity(m);
    let mut i = 0;
    while i < m {
        let mut end = i + 1;
        while end < m && values[end] - values[end - 1] <= cluster_tol {
            end += 1;
        }
        let multiplicity = end - i;
        let mu = values[i..end].iter().sum::<f64>() / multiplicity as f64;
        let shifted = b - DMatrix::identity(m, m) * mu;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
        let worst = svd.singular_values[order[multiplicity - 1]];
        if worst > 1e-6 * scale {
            return Err(Error::Coupling(format!(
                "eigenvalue {mu} has multiplicity {multiplicity} but a smaller eigenspace \
                 (singular value {worst:e})"
            )));
        }
        for &row in &order[..multiplicity] {
            columns.push(v_t.row(row).transpose());
            sorted.push(mu);
        }
        i = end;
    }
    Ok((DVector::from_vec(sorted), DMatrix::from_columns(&columns)))
}

/// `M`-component Strang stepper.
pub struct VgpeSolver {
    params: VgpeParams,
    decomposition: CouplingDecomposition,
    plan: SinePlan,
    coords: NodeCoordinates,
    scratch: DstScratch,
    kinetic: Option<(f64, Array3<Complex64>)>,
}

impl VgpeSolver {
    pub fn new(grid: &GridSpec, params: VgpeParams) -> Result<Self> {
        params.validate()?;
        let decomposition = decompose_coupling(&params.drive.matrix)?;
        log::info!(
            "drive decomposition: eigenvalues {:?}, residual {:e}, cond(D) {:e}",
            decomposition.eigenvalues.as_slice(),
            decomposition.residual,
            decomposition.condition()
        );
        Ok(Self {
            decomposition,
            plan: SinePlan::new(grid),
            coords: NodeCoordinates::new(grid),
            scratch: DstScratch::default(),
            kinetic: None,
            params,
        })
    }

    pub fn params(&self) -> &VgpeParams {
        &self.params
    }

    pub fn decomposition(&self) -> &CouplingDecomposition {
        &self.decomposition
    }

    pub fn grid(&self) -> &GridSpec {
        self.plan.grid()
    }

    fn check_state(&self, state: &CoupledState) -> Result<()> {
        let m = self.params.component_count();
        if state.component_count() != m {
            return Err(Error::InvalidParameter(format!(
                "{m}-component solver got {} components",
                state.component_count()
            )));
        }
        if state.grid() != self.grid() {
            return Err(Error::GridMismatch(format!(
                "solver grid {}, state grid {}",
                self.grid(),
                state.grid()
            )));
        }
        Ok(())
    }

    /// Exact potential + nonlinear phase over `[t_n, t_n + duration]`.
    pub fn potential_half_step(
        &self,
        state: &mut CoupledState,
        t_n: f64,
        duration: f64,
    ) -> Result<()> {
        self.check_state(state)?;
        if duration < 0.0 {
            return Err(Error::BackwardWindow {
                start: t_n,
                end: t_n + duration,
            });
        }
        SplitStepper::phase(self, state, t_n, t_n + duration);
        Ok(())
    }

    /// Free evolution and drive over `[t_n, t_n + duration]`.
    pub fn kinetic_drive_step(
        &mut self,
        state: &mut CoupledState,
        t_n: f64,
        duration: f64,
    ) -> Result<()> {
        self.check_state(state)?;
        self.linear(state, t_n, duration);
        Ok(())
    }

    /// One Strang step of signed length `dt`.
    pub fn step_by(&mut self, state: &mut CoupledState, dt: f64) -> Result<()> {
        self.check_state(state)?;
        splitting::strang(self, state, dt);
        Ok(())
    }

    pub fn strang_step(&mut self, state: &mut CoupledState) -> Result<()> {
        self.step_by(state, self.params.dt)
    }

    /// Same sampling contract as the two-component solver.
    pub fn evolve(
        &mut self,
        state: &mut CoupledState,
        n_steps: usize,
        sample_every: usize,
        mut observer: impl FnMut(&CoupledState),
    ) -> Result<()> {
        self.check_state(state)?;
        let dt = self.params.dt;
        splitting::evolve(self, state, dt, n_steps, sample_every, &mut observer)
    }
}

impl SplitStepper for VgpeSolver {
    fn phase(&self, state: &mut CoupledState, t0: f64, t1: f64) {
        phase_step(
            state,
            &self.coords,
            &self.params.beta,
            &self.params.potentials,
            self.params.omega,
            t0,
            t1,
        );
    }

    fn linear(&mut self, state: &mut CoupledState, t_n: f64, dt: f64) {
        if self.kinetic.as_ref().map(|(tau, _)| *tau) != Some(dt) {
            self.kinetic = Some((dt, kinetic_factors(self.plan.grid(), dt)));
        }
        let g = self.params.drive.envelope.integral(t_n, t_n + dt);
        let mix = self.decomposition.propagator(g);
        let m = mix.nrows();
        for c in state.components_mut() {
            self.plan.forward_in_place(c.values_mut(), &mut self.scratch);
        }
        let eta = self.kinetic.as_ref().expect("set above").1.as_slice().expect("standard layout");
        let mut slices: Vec<&mut [Complex64]> = state
            .components_mut()
            .iter_mut()
            .map(|c| c.values_mut().as_slice_mut().expect("standard layout"))
            .collect();
        let mut old = vec![Complex64::default(); m];
        for (node, e) in eta.iter().enumerate() {
            for (o, s) in old.iter_mut().zip(&slices) {
                *o = s[node];
            }
            for (j, s) in slices.iter_mut().enumerate() {
                let mixed: Complex64 = (0..m).map(|k| mix[(j, k)] * old[k]).sum();
                s[node] = e * mixed;
            }
        }
        for c in state.components_mut() {
            self.plan.inverse_in_place(c.values_mut(), &mut self.scratch);
        }
    }
}

/// Convenience wrapper building a solver on the state's grid.
pub fn strang_step(state: &mut CoupledState, params: &VgpeParams) -> Result<()> {
    VgpeSolver::new(state.grid(), params.clone())?.strang_step(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoxDomain;
    use crate::rotating::HarmonicTrap;

    fn sym(values: &[f64], m: usize) -> DMatrix<f64> {
        DMatrix::from_row_slice(m, m, values)
    }

    #[test]
    fn josephson_matrix_decomposition() {
        let lambda = 1.3;
        let dec = decompose_coupling(&sym(&[0.0, -lambda, -lambda, 0.0], 2)).unwrap();
        assert!((dec.eigenvalues()[0] + lambda).abs() < 1e-14);
        assert!((dec.eigenvalues()[1] - lambda).abs() < 1e-14);
        let d = dec.d();
        assert!((d[(0, 0)] - d[(0, 1)]).abs() < 1e-14);
        assert!((d[(1, 0)] + d[(1, 1)]).abs() < 1e-14);
        assert!(dec.residual() < 1e-14);
    }

    #[test]
    fn diagonal_drive_keeps_identity() {
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, -1.0, 0.5]));
        let dec = decompose_coupling(&b).unwrap();
        assert_eq!(dec.d(), &DMatrix::identity(3, 3));
        assert_eq!(dec.eigenvalues().as_slice(), &[2.0, -1.0, 0.5]);
        assert_eq!(dec.residual(), 0.0);
    }

    #[test]
    fn nonsymmetric_real_spectrum() {
        let b = sym(&[1.0, 2.0, 0.0, 0.5, -1.0, 0.3, 0.0, 0.1, 2.0], 3);
        let dec = decompose_coupling(&b).unwrap();
        assert!(dec.residual() <= 1e-12);
        assert!(dec.condition() >= 1.0);
    }

    #[test]
    fn rejects_rotation_and_jordan_block() {
        let rot = sym(&[0.0, -1.0, 1.0, 0.0], 2);
        let err = decompose_coupling(&rot).unwrap_err().to_string();
        assert!(err.contains("complex eigenvalue"), "{err}");
        let jordan = sym(&[1.0, 1.0, 0.0, 1.0], 2);
        assert!(matches!(decompose_coupling(&jordan), Err(Error::Coupling(_))));
        assert!(decompose_coupling(&DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn repeated_eigenvalue_with_full_eigenspace() {
        // similar to diag(1, 1, 3) through a non-orthogonal basis change
        let p = sym(&[1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0], 3);
        let lam = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 3.0]));
        let b = &p * lam * p.clone().try_inverse().unwrap();
        let dec = decompose_coupling(&b).unwrap();
        assert!(dec.residual() <= 1e-12);
        let ev = dec.eigenvalues();
        assert!((ev[0] - 1.0).abs() < 1e-8 && (ev[1] - 1.0).abs() < 1e-8 && (ev[2] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn propagator_is_unitary_for_symmetric_drive() {
        let b = sym(&[0.2, -1.0, 0.4, -1.0, 0.0, 0.3, 0.4, 0.3, -0.5], 3);
        let dec = decompose_coupling(&b).unwrap();
        let u = dec.propagator(0.7);
        let eye = &u.adjoint() * &u;
        for j in 0..3 {
            for k in 0..3 {
                let target = if j == k { 1.0 } else { 0.0 };
                assert!((eye[(j, k)] - target).norm() < 1e-13);
            }
        }
    }

    fn three_component() -> VgpeParams {
        let trap: PotentialSpec = HarmonicTrap::new(1.0, 1.1).unwrap().into();
        VgpeParams {
            beta: vec![vec![10.0, 8.0, 7.0], vec![8.0, 9.0, 6.0], vec![7.0, 6.0, 11.0]],
            omega: 0.5,
            dt: 1e-2,
            potentials: vec![trap; 3],
            drive: Drive {
                matrix: sym(&[0.0, -1.0, 0.2, -1.0, 0.0, -0.5, 0.2, -0.5, 0.0], 3),
                envelope: Envelope::function(|t| (2.0 * t).cos()),
            },
        }
    }

    fn three_state(g: &GridSpec) -> CoupledState {
        let a = |x: &[f64]| Complex64::new((-(x[0] * x[0] + x[1] * x[1])).exp(), 0.0);
        let b = |x: &[f64]| Complex64::new(x[0], 0.3) * (-(x[0] * x[0] + x[1] * x[1])).exp();
        let c = |x: &[f64]| Complex64::new(0.1, x[1]) * (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp();
        CoupledState::from_functions(g, &[&a, &b, &c]).unwrap()
    }

    #[test]
    fn validation_errors() {
        let mut p = three_component();
        p.beta[0][2] = 1.0;
        assert!(p.validate().is_err());
        let mut p = three_component();
        p.potentials.pop();
        assert!(p.validate().is_err());
        let mut p = three_component();
        p.drive.matrix = DMatrix::zeros(2, 2);
        assert!(p.validate().is_err());
    }

    #[test]
    fn strang_step_conserves_total_mass() {
        let g = GridSpec::new(BoxDomain::square(-4.0, 4.0).unwrap(), &[32, 32]).unwrap();
        let mut solver = VgpeSolver::new(&g, three_component()).unwrap();
        let mut s = three_state(&g);
        let n0 = s.total_mass();
        for _ in 0..10 {
            solver.strang_step(&mut s).unwrap();
            assert!((s.total_mass() - n0).abs() <= 1e-12 * n0);
        }
    }

    #[test]
    fn zero_envelope_keeps_component_masses() {
        let g = GridSpec::new(BoxDomain::square(-4.0, 4.0).unwrap(), &[16, 16]).unwrap();
        let mut p = three_component();
        p.drive.envelope = Envelope::Constant(0.0);
        let mut solver = VgpeSolver::new(&g, p).unwrap();
        let mut s = three_state(&g);
        let m0 = s.masses();
        solver.kinetic_drive_step(&mut s, 0.0, 0.05).unwrap();
        for (a, b) in s.masses().iter().zip(&m0) {
            assert!((a - b).abs() <= 1e-13 * b);
        }
    }

    #[test]
    fn phase_preserves_moduli() {
        let g = GridSpec::new(BoxDomain::square(-4.0, 4.0).unwrap(), &[16, 16]).unwrap();
        let solver = VgpeSolver::new(&g, three_component()).unwrap();
        let before = three_state(&g);
        let mut s = before.clone();
        solver.potential_half_step(&mut s, 0.2, 0.05).unwrap();
        for j in 0..3 {
            for (a, b) in s.component(j).values().iter().zip(before.component(j).values()) {
                assert!((a.norm() - b.norm()).abs() <= 1e-15);
            }
        }
        assert!(solver.potential_half_step(&mut s, 0.2, -0.05).is_err());
    }

    #[test]
    fn envelope_integrals() {
        assert_eq!(Envelope::Constant(2.0).integral(1.0, 1.5), 1.0);
        let e = Envelope::function(|t| t * t);
        assert!((e.integral(0.0, 1.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((e.integral(1.0, 0.0) + 1.0 / 3.0).abs() < 1e-15);
    }
}
