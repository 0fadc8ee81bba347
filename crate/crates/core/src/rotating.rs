//! Rotating Lagrangian coordinates: the rotation `A(t)`, point maps between
//! frames, effective potentials `W(x~, t) = V(A(t) x~, t)` and their time
//! integrals.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Simpson panels per integration window for non-harmonic potentials.
pub const DEFAULT_SIMPSON_PANELS: usize = 8;

/// Rotation `A(t)` about the z axis with angular velocity `omega`.
///
/// In 2D the matrix is `((cos, sin), (-sin, cos))` evaluated at `omega t`;
/// in 3D the z row and column are those of the identity.
pub fn rotation_matrix(t: f64, omega: f64, dim: usize) -> DMatrix<f64> {
    let (s, c) = (omega * t).sin_cos();
    let mut a = DMatrix::identity(dim, dim);
    a[(0, 0)] = c;
    a[(0, 1)] = s;
    a[(1, 0)] = -s;
    a[(1, 1)] = c;
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `x~ = A(t)^T x`
    ToLagrangian,
    /// `x = A(t) x~`
    ToEulerian,
}

/// Maps a point between the Eulerian and rotating Lagrangian frames. The z
/// coordinate, if present, is unchanged.
pub fn map_point(point: &[f64], t: f64, omega: f64, direction: Direction) -> Vec<f64> {
    let (s, c) = (omega * t).sin_cos();
    let (x, y) = (point[0], point[1]);
    let mut out = point.to_vec();
    match direction {
        Direction::ToEulerian => {
            out[0] = c * x + s * y;
            out[1] = -s * x + c * y;
        }
        Direction::ToLagrangian => {
            out[0] = c * x - s * y;
            out[1] = s * x + c * y;
        }
    }
    out
}

/// Trap frequencies `gamma_x, gamma_y (, gamma_z)` of
/// `V(x) = (gamma_x^2 x^2 + gamma_y^2 y^2 + gamma_z^2 z^2) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicTrap {
    gamma: [f64; 3],
}

impl HarmonicTrap {
    pub fn new(gamma_x: f64, gamma_y: f64) -> Result<Self> {
        Self::with_z(gamma_x, gamma_y, 0.0)
    }

    /// Trap with a z frequency; `gamma_z` is ignored on 2D grids.
    pub fn with_z(gamma_x: f64, gamma_y: f64, gamma_z: f64) -> Result<Self> {
        for (name, g) in [("gamma_x", gamma_x), ("gamma_y", gamma_y)] {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "trap frequency {name} = {g} must be positive"
                )));
            }
        }
        if !(gamma_z.is_finite() && gamma_z >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "trap frequency gamma_z = {gamma_z} must be non-negative"
            )));
        }
        Ok(Self {
            gamma: [gamma_x, gamma_y, gamma_z],
        })
    }

    pub fn isotropic(gamma: f64) -> Result<Self> {
        Self::with_z(gamma, gamma, gamma)
    }

    pub fn gamma_x(&self) -> f64 {
        self.gamma[0]
    }

    pub fn gamma_y(&self) -> f64 {
        self.gamma[1]
    }

    pub fn gamma_z(&self) -> f64 {
        self.gamma[2]
    }

    /// `V` at an Eulerian point.
    pub fn eval(&self, x: &[f64]) -> f64 {
        0.5 * x
            .iter()
            .zip(self.gamma.iter())
            .map(|(x, g)| g * g * x * x)
            .sum::<f64>()
    }

    /// Radially (or cylindrically) symmetric in the rotation plane.
    pub fn is_symmetric(&self) -> bool {
        self.gamma[0] == self.gamma[1]
    }

    fn mean_and_split(&self) -> (f64, f64) {
        let (gx2, gy2) = (self.gamma[0].powi(2), self.gamma[1].powi(2));
        ((gx2 + gy2) / 4.0, (gx2 - gy2) / 4.0)
    }

    /// `W(., t)` as a quadratic form in the Lagrangian coordinates.
    pub fn effective_form(&self, t: f64, omega: f64) -> QuadraticForm {
        let (mean, split) = self.mean_and_split();
        let (s2, c2) = (2.0 * omega * t).sin_cos();
        QuadraticForm {
            xx: mean + split * c2,
            yy: mean - split * c2,
            xy: 2.0 * split * s2,
            zz: 0.5 * self.gamma[2].powi(2),
        }
    }

    /// `int_{t0}^{t1} W(., tau) d tau` as a quadratic form.
    ///
    /// The oscillating part uses `sin(2wt1) - sin(2wt0) = 2 cos(w(t1+t0)) sin(w(t1-t0))`
    /// (and the matching cosine identity) so that `omega -> 0` stays exact.
    pub fn phase_form(&self, t0: f64, t1: f64, omega: f64) -> QuadraticForm {
        let (mean, split) = self.mean_and_split();
        let tau = t1 - t0;
        let sum = t1 + t0;
        let sinc = if omega == 0.0 {
            tau
        } else {
            (omega * tau).sin() / omega
        };
        let (s, c) = (omega * sum).sin_cos();
        let d = split * sinc;
        QuadraticForm {
            xx: mean * tau + d * c,
            yy: mean * tau - d * c,
            xy: 2.0 * d * s,
            zz: 0.5 * self.gamma[2].powi(2) * tau,
        }
    }
}

/// `xx x^2 + yy y^2 + xy x y + zz z^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadraticForm {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
    pub zz: f64,
}

impl QuadraticForm {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let z = x.get(2).copied().unwrap_or(0.0);
        self.xx * x[0] * x[0] + self.yy * x[1] * x[1] + self.xy * x[0] * x[1] + self.zz * z * z
    }
}

type PotentialFn = dyn Fn(&[f64], f64) -> f64 + Send + Sync;

/// User-supplied potential `V(x, t)` in Eulerian coordinates.
#[derive(Clone)]
pub struct CustomPotential {
    f: Arc<PotentialFn>,
    time_dependent: bool,
    panels: usize,
}

impl CustomPotential {
    /// `time_dependent` tells whether `f` actually reads its time argument.
    pub fn new(
        f: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
        time_dependent: bool,
    ) -> Self {
        Self {
            f: Arc::new(f),
            time_dependent,
            panels: DEFAULT_SIMPSON_PANELS,
        }
    }

    pub fn with_panels(mut self, panels: usize) -> Self {
        self.panels = panels.max(1);
        self
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn is_time_dependent(&self) -> bool {
        self.time_dependent
    }

    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        (self.f)(x, t)
    }
}

impl fmt::Debug for CustomPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPotential")
            .field("time_dependent", &self.time_dependent)
            .field("panels", &self.panels)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum PotentialSpec {
    Harmonic(HarmonicTrap),
    Custom(CustomPotential),
}

impl PotentialSpec {
    /// `W` does not change with time in the rotating frame.
    pub fn is_static(&self, omega: f64) -> bool {
        match self {
            PotentialSpec::Harmonic(trap) => trap.is_symmetric() || omega == 0.0,
            PotentialSpec::Custom(c) => !c.time_dependent && omega == 0.0,
        }
    }
}

impl From<HarmonicTrap> for PotentialSpec {
    fn from(trap: HarmonicTrap) -> Self {
        PotentialSpec::Harmonic(trap)
    }
}

/// `W(x~, t) = V(A(t) x~, t)`.
pub fn effective_potential(spec: &PotentialSpec, point: &[f64], t: f64, omega: f64) -> f64 {
    match spec {
        PotentialSpec::Harmonic(trap) => trap.effective_form(t, omega).eval(point),
        PotentialSpec::Custom(c) => {
            let x = map_point(point, t, omega, Direction::ToEulerian);
            c.eval(&x, t)
        }
    }
}

/// `int_{t_n}^{t} W(x~, tau) d tau`, analytic for harmonic traps and composite
/// Simpson otherwise.
pub fn phase_integral(
    spec: &PotentialSpec,
    point: &[f64],
    t_n: f64,
    t: f64,
    omega: f64,
) -> Result<f64> {
    if t < t_n {
        return Err(Error::BackwardWindow { start: t_n, end: t });
    }
    Ok(signed_phase_integral(spec, point, t_n, t, omega))
}

/// Same integral with an oriented window (`t1 < t0` negates it).
pub(crate) fn signed_phase_integral(
    spec: &PotentialSpec,
    point: &[f64],
    t0: f64,
    t1: f64,
    omega: f64,
) -> f64 {
    match spec {
        PotentialSpec::Harmonic(trap) => trap.phase_form(t0, t1, omega).eval(point),
        PotentialSpec::Custom(c) => {
            if spec.is_static(omega) {
                c.eval(point, t0) * (t1 - t0)
            } else {
                simpson(|tau| effective_potential(spec, point, tau, omega), t0, t1, c.panels)
            }
        }
    }
}

/// Composite Simpson rule with `panels` panels (two subintervals each).
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 0..panels {
        let left = a + i as f64 * h;
        sum += 4.0 * f(left + 0.5 * h);
        if i > 0 {
            sum += 2.0 * f(left);
        }
    }
    sum * h / 6.0
}
