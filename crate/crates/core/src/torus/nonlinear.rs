//! The nonlinear Cayley operator of a graph over the flat torus, sampled on a
//! uniform grid, and the finite-difference check of its linearization.
//!
//! A section `(v₁, w) ∈ ν^{1,0} ⊕ Λ^{0,2}N⊗ν^{1,0}` determines the complex
//! normal field `ṽ = v₁ + ι⁻¹(w)` with `ι⁻¹` the inverse normal isomorphism.
//! On the flat model the exponential map is translation, so the graph of a
//! real normal field `n` has tangent frame `e_j + ∂_j n`. At every grid point
//! `τ` of that frame is projected onto `E ⊂ Λ²₇` and read off through
//! `Ψ(β)_{ab} = 2β(∂_{z̄_a}, ∂_{z̄_b})`. The complex field is handled by
//! complexification: `F(ṽ) = F(Re ṽ) + i F(Im ṽ)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde_json::{json, Value};
use std::f64::consts::PI;

use super::operators::dirac_matrix;
use super::{Bundle, FourierSection, TorusModel};
use crate::error::{Error, Result};
use crate::exterior::{ComplexMultivector, ComplexVector, Vector};
use crate::graphs::system::e_basis;
use crate::graphs::{normal_isom_inverse, BundleValuedForm, InverseNormalization};
use crate::spin7::CayleyForm;

/// Residuals below this are treated as pure roundoff and dropped from fits.
pub const RESIDUAL_FLOOR: f64 = 1e-13;

/// The default step ladder.
pub const DEFAULT_LADDER: [f64; 4] = [1e-2, 3e-3, 1e-3, 3e-4];

/// Accepted range of the fitted log–log slope.
pub const SLOPE_RANGE: (f64, f64) = (1.9, 2.1);

const FORMS01_RANK: usize = 4;

/// A `Λ^{0,1}N ⊗ ν^{1,0}` field sampled on the grid `(ℤ/G)⁴`, components
/// ordered as in [`Bundle::Forms01`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridSection {
    size: usize,
    values: Vec<[Complex64; FORMS01_RANK]>,
}

impl GridSection {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn values(&self) -> &[[Complex64; FORMS01_RANK]] {
        &self.values
    }

    /// Samples `scale · Σ_k c_k e^{2πi k·x}`.
    pub fn sample(model: &TorusModel<f64>, section: &FourierSection<f64>, scale: f64) -> Result<Self> {
        if section.bundle() != Bundle::Forms01 {
            return Err(Error::Invalid("only Λ^{0,1}⊗ν^{1,0} sections are sampled".into()));
        }
        let size = model.grid_size();
        let values = grid_points(size)
            .map(|x| {
                let mut out = [Complex64::new(0.0, 0.0); FORMS01_RANK];
                for (m, k) in model.modes().iter().enumerate() {
                    let e = phase(k, &x) * scale;
                    for (c, o) in out.iter_mut().enumerate() {
                        *o += section.coeff(m, c) * e;
                    }
                }
                out
            })
            .collect();
        Ok(Self { size, values })
    }

    /// Discrete L² norm `(mean_x Σ_c |s_c(x)|²)^{1/2}`.
    pub fn norm(&self) -> f64 {
        let total: f64 = self.values.iter().flat_map(|v| v.iter()).map(|z| z.norm_sqr()).sum();
        (total / self.values.len().max(1) as f64).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flat_map(|v| v.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `self − s·other`.
    pub fn sub_scaled(&self, other: &Self, s: f64) -> Result<Self> {
        if self.size != other.size {
            return Err(Error::DimensionMismatch { left: self.size, right: other.size });
        }
        let values =
            self.values.iter().zip(&other.values).map(|(a, b)| std::array::from_fn(|c| a[c] - b[c] * s)).collect();
        Ok(Self { size: self.size, values })
    }
}

fn grid_points(size: usize) -> impl Iterator<Item = [f64; 4]> {
    let h = 1.0 / size as f64;
    (0..size.pow(4)).map(move |mut i| {
        let mut x = [0.0; 4];
        for slot in x.iter_mut().rev() {
            *slot = (i % size) as f64 * h;
            i /= size;
        }
        x
    })
}

fn phase(k: &[i64; 4], x: &[f64; 4]) -> Complex64 {
    let arg: f64 = k.iter().zip(x).map(|(&ki, &xi)| ki as f64 * xi).sum();
    Complex64::from_polar(1.0, 2.0 * PI * arg)
}

/// Pointwise data shared by every evaluation on one model.
struct Fiber {
    phi: CayleyForm<f64>,
    basis: Vec<crate::exterior::Multivector<f64>>,
    /// `Ψ ∘ (orthogonal projection onto E)` as a map from the inner products
    /// `⟨β_i, τ⟩` to the four `Λ^{0,1}⊗ν^{1,0}` components.
    readout: DMatrix<Complex64>,
    /// `∂_{z₃}, ∂_{z₄}, ι⁻¹(dz̄₁₂⊗∂_{z₃}), ι⁻¹(dz̄₁₂⊗∂_{z₄})` in ℂ⁸.
    normal_frame: [ComplexVector<f64>; 4],
}

impl Fiber {
    fn new(model: &TorusModel<f64>) -> Result<Self> {
        let cy = model.cy();
        let j = model.j();
        let phi = CayleyForm::from_cy(cy)?;
        let basis = e_basis(&phi);
        let gram = DMatrix::from_fn(basis.len(), basis.len(), |a, b| basis[a].dot_coeffs(&basis[b]));
        let gram_inv = gram.try_inverse().ok_or(Error::Singular)?;
        let d_zb: Vec<ComplexVector<f64>> = (1..=4).map(|k| j.d_dz_bar(k)).collect();
        let mut psi = DMatrix::zeros(FORMS01_RANK, basis.len());
        for (i, b) in basis.iter().enumerate() {
            let bc = ComplexMultivector::real(b.clone());
            for a in 0..2 {
                for nb in 0..2 {
                    psi[(2 * a + nb, i)] = bc.evaluate(&[d_zb[a].clone(), d_zb[2 + nb].clone()])? * 2.0;
                }
            }
        }
        let readout = psi * gram_inv.map(|x| Complex64::new(x, 0.0));
        let dzb12 = j.dz_bar::<f64>(1).wedge(&j.dz_bar(2))?;
        let inverse = |b: usize| -> Result<ComplexVector<f64>> {
            let form = BundleValuedForm::decomposable(&dzb12, &j.d_dz(b))?;
            Ok(normal_isom_inverse(cy, &form, InverseNormalization::Corrected, 1e-12)?.into_vector())
        };
        let normal_frame = [j.d_dz(3), j.d_dz(4), inverse(3)?, inverse(4)?];
        Ok(Self { phi, basis, readout, normal_frame })
    }

    /// `Ψ(π_E τ(e_j + D_j))` for the real displacement derivatives `D_j`.
    fn evaluate(&self, derivs: &[[f64; 8]; 4]) -> Result<[Complex64; FORMS01_RANK]> {
        if derivs.iter().all(|d| d.iter().all(|&x| x == 0.0)) {
            return Ok([Complex64::new(0.0, 0.0); FORMS01_RANK]);
        }
        let frame: Vec<Vector<f64>> = (0..4)
            .map(|j| {
                let mut c = derivs[j];
                c[j] += 1.0;
                Vector::new(c.to_vec())
            })
            .collect();
        let tau = self.phi.tau_on(&frame)?;
        let r = DVector::from_iterator(
            self.basis.len(),
            self.basis.iter().map(|b| Complex64::new(b.dot_coeffs(tau.form()), 0.0)),
        );
        let out = &self.readout * r;
        Ok(std::array::from_fn(|c| out[c]))
    }
}

/// Checks the pair `(v₁, w)` and returns the per-mode normal-vector
/// coefficients of `ṽ` in ℂ⁸.
fn normal_field(fiber: &Fiber, v1: &FourierSection<f64>, w: &FourierSection<f64>) -> Result<Vec<[Complex64; 8]>> {
    if v1.bundle() != Bundle::Normal || w.bundle() != Bundle::Forms02 {
        return Err(Error::Invalid("expected (ν^{1,0}, Λ^{0,2}⊗ν^{1,0}) sections".into()));
    }
    if v1.coeffs().len() != w.coeffs().len() {
        return Err(Error::DimensionMismatch { left: v1.coeffs().len(), right: w.coeffs().len() });
    }
    let modes = v1.coeffs().len() / Bundle::Normal.rank();
    let frame: Vec<[Complex64; 8]> =
        fiber.normal_frame.iter().map(|v| std::array::from_fn(|i| v.component(i + 1))).collect();
    Ok((0..modes)
        .map(|m| {
            let weights = [v1.coeff(m, 0), v1.coeff(m, 1), w.coeff(m, 0), w.coeff(m, 1)];
            let mut out = [Complex64::new(0.0, 0.0); 8];
            for (c, f) in weights.iter().zip(&frame) {
                for i in 0..8 {
                    out[i] += *c * f[i];
                }
            }
            out
        })
        .collect())
}

/// `F(t·ṽ)` sampled on the `(2K+2)⁴` grid.
pub fn nonlinear_f(
    model: &TorusModel<f64>,
    v1: &FourierSection<f64>,
    w: &FourierSection<f64>,
    t: f64,
) -> Result<GridSection> {
    let fiber = Fiber::new(model)?;
    nonlinear_f_with(&fiber, model, v1, w, t)
}

fn nonlinear_f_with(
    fiber: &Fiber,
    model: &TorusModel<f64>,
    v1: &FourierSection<f64>,
    w: &FourierSection<f64>,
    t: f64,
) -> Result<GridSection> {
    let field = normal_field(fiber, v1, w)?;
    let size = model.grid_size();
    let mut values = Vec::with_capacity(size.pow(4));
    for x in grid_points(size) {
        // ∂_j ṽ(x) = Σ_k 2πi k_j V_k e^{2πi k·x}
        let mut d = [[Complex64::new(0.0, 0.0); 8]; 4];
        for (k, coeffs) in model.modes().iter().zip(&field) {
            if k.iter().all(|&ki| ki == 0) {
                continue;
            }
            let e = phase(k, &x) * Complex64::new(0.0, 2.0 * PI * t);
            for j in 0..4 {
                if k[j] == 0 {
                    continue;
                }
                let s = e * k[j] as f64;
                for i in 0..8 {
                    d[j][i] += coeffs[i] * s;
                }
            }
        }
        let re: [[f64; 8]; 4] = std::array::from_fn(|j| std::array::from_fn(|i| d[j][i].re));
        let im: [[f64; 8]; 4] = std::array::from_fn(|j| std::array::from_fn(|i| d[j][i].im));
        let fr = fiber.evaluate(&re)?;
        let fi = fiber.evaluate(&im)?;
        values.push(std::array::from_fn(|c| fr[c] + Complex64::i() * fi[c]));
    }
    Ok(GridSection { size, values })
}

/// The Dirac action `∂̄v₁ + ∂̄*w`, sampled on the same grid.
pub fn linear_action(
    model: &TorusModel<f64>,
    v1: &FourierSection<f64>,
    w: &FourierSection<f64>,
) -> Result<GridSection> {
    let dirac = dirac_matrix(model)?;
    let out = dirac.apply_units(&[v1.clone(), w.clone()])?;
    GridSection::sample(model, &out[0], dirac.scale())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdReport {
    pub ladder: Vec<f64>,
    /// `‖F(tv) − t·Lv‖` on the grid, one per rung.
    pub residuals: Vec<f64>,
    /// `‖Lv‖` on the grid.
    pub linear_norm: f64,
    /// Rungs kept for the fit (residual above [`RESIDUAL_FLOOR`]).
    pub used: Vec<bool>,
    pub slope: Option<f64>,
    /// Every residual is below the floor: the linearization is exact along `v`.
    pub vacuous: bool,
    pub pass: bool,
}

impl FdReport {
    pub fn to_json(&self) -> Value {
        json!({
            "ladder": self.ladder,
            "residuals": self.residuals,
            "linear_norm": self.linear_norm,
            "used": self.used,
            "slope": self.slope,
            "slope_range": [SLOPE_RANGE.0, SLOPE_RANGE.1],
            "vacuous": self.vacuous,
            "pass": self.pass,
        })
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Fits `log‖F(tv) − t·Lv‖` against `log t` over the ladder. Passes when the
/// slope lies in [`SLOPE_RANGE`], or vacuously when every residual is below
/// the roundoff floor.
pub fn fd_linearization_check(
    model: &TorusModel<f64>,
    v1: &FourierSection<f64>,
    w: &FourierSection<f64>,
    ladder: &[f64],
) -> Result<FdReport> {
    if ladder.len() < 3
        || ladder.iter().any(|&t| !(t > 0.0 && t.is_finite()))
        || ladder.windows(2).any(|p| p[1] >= p[0])
    {
        return Err(Error::BadLadder);
    }
    let fiber = Fiber::new(model)?;
    let lin = linear_action(model, v1, w)?;
    let mut residuals = Vec::with_capacity(ladder.len());
    for &t in ladder {
        let f = nonlinear_f_with(&fiber, model, v1, w, t)?;
        residuals.push(f.sub_scaled(&lin, t)?.norm());
    }
    let used: Vec<bool> = residuals.iter().map(|&r| r >= RESIDUAL_FLOOR).collect();
    let survivors = used.iter().filter(|&&u| u).count();
    let base = FdReport {
        ladder: ladder.to_vec(),
        residuals: residuals.clone(),
        linear_norm: lin.norm(),
        used: used.clone(),
        slope: None,
        vacuous: false,
        pass: false,
    };
    if survivors == 0 {
        return Ok(FdReport { vacuous: true, pass: true, ..base });
    }
    if survivors < 3 {
        return Err(Error::LadderTooShort { survivors });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        ladder.iter().zip(&residuals).zip(&used).filter(|(_, &u)| u).map(|((&t, &r), _)| (t, r)).unzip();
    let slope = log_log_slope(&xs, &ys);
    let pass = (SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&slope);
    Ok(FdReport { slope: Some(slope), pass, ..base })
}

/// Sup-norm distance between `F(tv)/t` and `Lv`, for a single `t`.
pub fn linearization_error(
    model: &TorusModel<f64>,
    v1: &FourierSection<f64>,
    w: &FourierSection<f64>,
    t: f64,
) -> Result<f64> {
    let f = nonlinear_f(model, v1, w, t)?;
    let lin = linear_action(model, v1, w)?;
    Ok(f.sub_scaled(&lin, t)?.max_abs() / t)
}
