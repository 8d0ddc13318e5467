//! The flat model `N = T⁴ = {z₃ = z₄ = 0} ⊂ T⁸ = ℂ⁴/ℤ⁸`.
//!
//! Sections are trigonometric polynomials `Σ_k c_k e^{2πi k·x}` over the
//! modes `k ∈ [−K, K]⁴`, with the normal bundle trivialized by the parallel
//! frame `∂_{z₃}, ∂_{z₄}`. On the unit torus the modes are L²-orthonormal, so
//! all inner products reduce to weighted sums over coefficients.

pub mod index;
pub mod nonlinear;
pub mod operators;

use num_complex::{Complex, Complex64};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::kahler::{CalabiYauModel, ComplexStructure};
use crate::linalg;
use crate::scalar::Scalar;
use crate::spin7::phi0_model;

pub use index::{index_from_chern, index_from_topology, ChernNumbers, TopologicalInvariants};
pub use nonlinear::{fd_linearization_check, nonlinear_f, FdReport, GridSection};
pub use operators::{
    adjoint_matrix, complex_linear_op, dbar_matrix, dbar_star_matrix, dirac_matrix, kernel_dim, KernelReport,
    OperatorMatrix,
};

/// Largest truncation accepted; `(2K+1)⁴` modes grow quickly.
pub const MAX_TRUNCATION: usize = 6;

/// Fiber bundles carried by sections and operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bundle {
    /// `ν^{1,0}`, frame `∂_{z₃}, ∂_{z₄}`.
    Normal,
    /// `ν^{0,1}`, frame `∂_{z̄₃}, ∂_{z̄₄}`.
    AntiNormal,
    /// `Λ^{0,1}N ⊗ ν^{1,0}`, frame `dz̄_a ⊗ ∂_{z_b}` ordered `(1,3),(1,4),(2,3),(2,4)`.
    Forms01,
    /// `Λ^{0,2}N ⊗ ν^{1,0}`, frame `dz̄₁∧dz̄₂ ⊗ ∂_{z_b}`.
    Forms02,
    /// `Λ^{1,0}N ⊗ ν^{*1,0}`, frame `dz_a ⊗ dz_c`.
    Forms10Dual,
    /// `Λ^{0,1}N ⊗ ν^{*0,1}`, frame `dz̄_a ⊗ dz̄_c`.
    Forms01Dual,
}

impl Bundle {
    pub fn rank(self) -> usize {
        match self {
            Bundle::Normal | Bundle::AntiNormal | Bundle::Forms02 => 2,
            Bundle::Forms01 | Bundle::Forms10Dual | Bundle::Forms01Dual => 4,
        }
    }

    /// Twice the pointwise squared norm of each frame element
    /// (`|dz̄|² = 2`, `|∂_z|² = ½`), so that
    /// `2⟨s, s'⟩_{L²} = Σ_k Σ_c weight_c · s_{k,c} · conj(s'_{k,c})`.
    /// The common factor 2 keeps the weights integral and drops out of adjoints.
    pub fn weights(self) -> Vec<i64> {
        match self {
            Bundle::Normal | Bundle::AntiNormal => vec![1; 2],
            Bundle::Forms01 => vec![2; 4],
            Bundle::Forms02 => vec![4; 2],
            Bundle::Forms10Dual | Bundle::Forms01Dual => vec![8; 4],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Bundle::Normal => "nu^{1,0}",
            Bundle::AntiNormal => "nu^{0,1}",
            Bundle::Forms01 => "Lambda^{0,1}N (x) nu^{1,0}",
            Bundle::Forms02 => "Lambda^{0,2}N (x) nu^{1,0}",
            Bundle::Forms10Dual => "Lambda^{1,0}N (x) nu^{*1,0}",
            Bundle::Forms01Dual => "Lambda^{0,1}N (x) nu^{*0,1}",
        }
    }
}

/// Truncation `K` plus the Calabi–Yau structure on ℂ⁴.
#[derive(Debug, Clone)]
pub struct TorusModel<S> {
    truncation: usize,
    cy: CalabiYauModel<S>,
    modes: Vec<[i64; 4]>,
}

impl<S: Scalar> TorusModel<S> {
    /// Uses the structure for which `½ω² + Re Ω` is the standard Cayley form.
    pub fn new(truncation: usize) -> Result<Self> {
        Self::with_model(truncation, phi0_model())
    }

    pub fn with_model(truncation: usize, cy: CalabiYauModel<S>) -> Result<Self> {
        if cy.m() != 4 {
            return Err(Error::WrongModelDimension { expected: 4, found: cy.m() });
        }
        if truncation > MAX_TRUNCATION {
            return Err(Error::Invalid(format!("truncation K = {truncation} exceeds {MAX_TRUNCATION}")));
        }
        let k = truncation as i64;
        let mut modes = Vec::with_capacity((2 * truncation + 1).pow(4));
        for a in -k..=k {
            for b in -k..=k {
                for c in -k..=k {
                    for d in -k..=k {
                        modes.push([a, b, c, d]);
                    }
                }
            }
        }
        Ok(Self { truncation, cy, modes })
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn cy(&self) -> &CalabiYauModel<S> {
        &self.cy
    }

    pub fn j(&self) -> &ComplexStructure {
        self.cy.j()
    }

    pub fn modes(&self) -> &[[i64; 4]] {
        &self.modes
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn mode_index(&self, k: [i64; 4]) -> Option<usize> {
        let kk = self.truncation as i64;
        if k.iter().any(|x| x.abs() > kk) {
            return None;
        }
        let w = 2 * kk + 1;
        Some(k.iter().fold(0i64, |acc, &x| acc * w + (x + kk)) as usize)
    }

    /// Sample points per axis of the uniform grid.
    pub fn grid_size(&self) -> usize {
        2 * self.truncation + 2
    }

    pub fn to_f64(&self) -> TorusModel<f64> {
        TorusModel { truncation: self.truncation, cy: self.cy.to_f64(), modes: self.modes.clone() }
    }

    pub fn describe(&self) -> Value {
        json!({
            "truncation": self.truncation,
            "modes": self.modes.len(),
            "grid_points": self.grid_size().pow(4),
            "j_signs": self.j().signs(),
            "phase": self.cy.phase().radians(),
        })
    }
}

/// Truncated Fourier coefficients `c[mode · rank + component]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSection<S> {
    bundle: Bundle,
    coeffs: Vec<Complex<S>>,
}

impl<S: Scalar> FourierSection<S> {
    pub fn zero(model: &TorusModel<S>, bundle: Bundle) -> Self {
        Self { bundle, coeffs: vec![Complex::new(S::zero(), S::zero()); model.mode_count() * bundle.rank()] }
    }

    pub fn from_coeffs(model: &TorusModel<S>, bundle: Bundle, coeffs: Vec<Complex<S>>) -> Result<Self> {
        let expected = model.mode_count() * bundle.rank();
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch { left: expected, right: coeffs.len() });
        }
        Ok(Self { bundle, coeffs })
    }

    pub(crate) fn from_raw(bundle: Bundle, coeffs: Vec<Complex<S>>) -> Self {
        Self { bundle, coeffs }
    }

    /// `c · e^{2πi k·x}` in fiber component `component`.
    pub fn single_mode(
        model: &TorusModel<S>,
        bundle: Bundle,
        k: [i64; 4],
        component: usize,
        c: Complex<S>,
    ) -> Result<Self> {
        let idx = model.mode_index(k).ok_or_else(|| Error::Invalid(format!("mode {k:?} outside truncation")))?;
        if component >= bundle.rank() {
            return Err(Error::IndexOutOfRange { index: component, dim: bundle.rank() });
        }
        let mut s = Self::zero(model, bundle);
        s.coeffs[idx * bundle.rank() + component] = c;
        Ok(s)
    }

    pub fn bundle(&self) -> Bundle {
        self.bundle
    }

    pub fn coeffs(&self) -> &[Complex<S>] {
        &self.coeffs
    }

    pub fn coeff(&self, mode: usize, component: usize) -> &Complex<S> {
        &self.coeffs[mode * self.bundle.rank() + component]
    }

    pub fn scale(&self, z: &Complex<S>) -> Self {
        Self { bundle: self.bundle, coeffs: self.coeffs.iter().map(|c| c.clone() * z.clone()).collect() }
    }

    /// Weighted inner product `2⟨self, other⟩_{L²}` (antilinear in `other`).
    pub fn inner(&self, other: &Self) -> Result<Complex<S>> {
        if self.bundle != other.bundle || self.coeffs.len() != other.coeffs.len() {
            return Err(Error::Invalid("inner product of sections of different bundles".into()));
        }
        let w = self.bundle.weights();
        let r = self.bundle.rank();
        let mut acc = Complex::new(S::zero(), S::zero());
        for (i, (a, b)) in self.coeffs.iter().zip(&other.coeffs).enumerate() {
            acc = acc + a.clone() * b.conj() * S::from_i64(w[i % r]);
        }
        Ok(acc)
    }

    pub fn to_f64(&self) -> FourierSection<f64> {
        FourierSection {
            bundle: self.bundle,
            coeffs: self.coeffs.iter().map(|c| Complex64::new(c.re.to_f64(), c.im.to_f64())).collect(),
        }
    }
}

impl FourierSection<f64> {
    /// Gaussian coefficients scaled by `amplitude / √(modes · rank)`.
    pub fn random<R: Rng + ?Sized>(model: &TorusModel<f64>, bundle: Bundle, amplitude: f64, rng: &mut R) -> Self {
        let n = model.mode_count() * bundle.rank();
        let s = amplitude / (n as f64).sqrt();
        let coeffs = (0..n).map(|_| Complex64::new(linalg::gaussian(rng) * s, linalg::gaussian(rng) * s)).collect();
        Self { bundle, coeffs }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl<S: Scalar> FourierSection<S> {
    /// Random Gaussian-rational coefficients with numerators in `[-r, r]`
    /// and denominators in `[1, d]`.
    pub fn random_rational<R: Rng + ?Sized>(
        model: &TorusModel<S>,
        bundle: Bundle,
        r: i64,
        d: i64,
        rng: &mut R,
    ) -> Self {
        let n = model.mode_count() * bundle.rank();
        let mut draw = || S::from_ratio(rng.random_range(-r..=r), rng.random_range(1..=d));
        let coeffs = (0..n).map(|_| Complex::new(draw(), draw())).collect();
        Self { bundle, coeffs }
    }
}
