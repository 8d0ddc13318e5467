//! Mode-diagonal first-order operators on the flat torus.
//!
//! A constant-coefficient operator maps the mode `e^{2πi k·x}` to itself, so
//! it is stored as one small block per mode. On that mode the derivative
//! `∇_v` acts as `2πi k·v`; every block entry is therefore `π` times a
//! Gaussian rational, and blocks keep the rational part (`scale = π`).

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use num_traits::Zero;
use rand::Rng;
use serde_json::{json, Value};

use super::{Bundle, FourierSection, TorusModel};
use crate::error::{Error, Result};
use crate::exterior::{ComplexMultivector, ComplexVector};
use crate::kahler::ComplexStructure;
use crate::scalar::Scalar;

/// Relative SVD threshold separating kernel from the rest of the spectrum.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-8;

type Block<S> = Vec<Vec<Complex<S>>>;

#[derive(Debug, Clone)]
pub struct OperatorMatrix<S> {
    name: String,
    domain: Vec<Bundle>,
    codomain: Vec<Bundle>,
    modes: Vec<[i64; 4]>,
    rows: usize,
    cols: usize,
    blocks: Vec<Block<S>>,
    scale: f64,
}

fn czero<S: Scalar>() -> Complex<S> {
    Complex::new(S::zero(), S::zero())
}

impl<S: Scalar> OperatorMatrix<S> {
    /// A single dense block (no mode structure), for generic matrices.
    pub fn dense(name: &str, entries: Block<S>, scale: f64) -> Result<Self> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, Vec::len);
        if entries.iter().any(|r| r.len() != cols) {
            return Err(Error::Invalid("ragged matrix".into()));
        }
        Ok(Self {
            name: name.into(),
            domain: Vec::new(),
            codomain: Vec::new(),
            modes: vec![[0; 4]],
            rows,
            cols,
            blocks: vec![entries],
            scale,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &[Bundle] {
        &self.domain
    }

    pub fn codomain(&self) -> &[Bundle] {
        &self.codomain
    }

    pub fn modes(&self) -> &[[i64; 4]] {
        &self.modes
    }

    pub fn block_shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Total shape of the full (block-diagonal) matrix.
    pub fn shape(&self) -> (usize, usize) {
        (self.rows * self.blocks.len(), self.cols * self.blocks.len())
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Entries of the block for mode index `i`, in units of [`Self::scale`].
    pub fn block(&self, i: usize) -> &Block<S> {
        &self.blocks[i]
    }

    pub fn block_f64(&self, i: usize) -> DMatrix<Complex64> {
        let b = &self.blocks[i];
        DMatrix::from_fn(self.rows, self.cols, |r, c| {
            Complex64::new(b[r][c].re.to_f64(), b[r][c].im.to_f64()) * self.scale
        })
    }

    fn same_modes(&self, other: &Self) -> Result<()> {
        if self.modes != other.modes || self.scale != other.scale {
            return Err(Error::Invalid(format!("{} and {} act on different mode sets", self.name, other.name)));
        }
        Ok(())
    }

    /// `[A | B]` on the direct sum of the domains.
    pub fn hstack(&self, other: &Self, name: &str) -> Result<Self> {
        self.same_modes(other)?;
        if self.rows != other.rows || self.codomain != other.codomain {
            return Err(Error::Invalid("hstack needs a common codomain".into()));
        }
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.iter().zip(b).map(|(ra, rb)| ra.iter().chain(rb).cloned().collect()).collect())
            .collect();
        Ok(Self {
            name: name.into(),
            domain: self.domain.iter().chain(&other.domain).copied().collect(),
            codomain: self.codomain.clone(),
            modes: self.modes.clone(),
            rows: self.rows,
            cols: self.cols + other.cols,
            blocks,
            scale: self.scale,
        })
    }

    /// `[A; B]` into the direct sum of the codomains.
    pub fn vstack(&self, other: &Self, name: &str) -> Result<Self> {
        self.same_modes(other)?;
        if self.cols != other.cols || self.domain != other.domain {
            return Err(Error::Invalid("vstack needs a common domain".into()));
        }
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.iter().chain(b).cloned().collect()).collect();
        Ok(Self {
            name: name.into(),
            domain: self.domain.clone(),
            codomain: self.codomain.iter().chain(&other.codomain).copied().collect(),
            modes: self.modes.clone(),
            rows: self.rows + other.rows,
            cols: self.cols,
            blocks,
            scale: self.scale,
        })
    }

    /// Restriction to the domain components `start..end` (fiber indices).
    pub fn columns(&self, start: usize, end: usize, domain: Vec<Bundle>, name: &str) -> Self {
        let blocks = self.blocks.iter().map(|b| b.iter().map(|r| r[start..end].to_vec()).collect()).collect();
        Self {
            name: name.into(),
            domain,
            codomain: self.codomain.clone(),
            modes: self.modes.clone(),
            rows: self.rows,
            cols: end - start,
            blocks,
            scale: self.scale,
        }
    }

    /// Scale every entry by `z`.
    pub fn scaled(&self, z: &Complex<S>, name: &str) -> Self {
        let mut out = self.clone();
        out.name = name.into();
        for b in &mut out.blocks {
            for r in b.iter_mut() {
                for e in r.iter_mut() {
                    *e = e.clone() * z.clone();
                }
            }
        }
        out
    }

    /// Formal adjoint for the weighted L² products of the domain and codomain
    /// bundles: `W_dom⁻¹ Aᴴ W_cod` blockwise.
    pub fn weighted_adjoint(&self, name: &str) -> Result<Self> {
        let wd: Vec<i64> = self.domain.iter().flat_map(|b| b.weights()).collect();
        let wc: Vec<i64> = self.codomain.iter().flat_map(|b| b.weights()).collect();
        if wd.len() != self.cols || wc.len() != self.rows {
            return Err(Error::Invalid("adjoint needs bundle-tagged domain and codomain".into()));
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                (0..self.cols)
                    .map(|r| (0..self.rows).map(|c| b[c][r].conj() * S::from_ratio(wc[c], wd[r])).collect())
                    .collect()
            })
            .collect();
        Ok(Self {
            name: name.into(),
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            modes: self.modes.clone(),
            rows: self.cols,
            cols: self.rows,
            blocks,
            scale: self.scale,
        })
    }

    /// Apply to sections of the domain bundles; the result is in units of
    /// [`Self::scale`] so that it stays exact.
    pub fn apply_units(&self, input: &[FourierSection<S>]) -> Result<Vec<FourierSection<S>>> {
        let tags: Vec<Bundle> = input.iter().map(|s| s.bundle()).collect();
        if tags != self.domain {
            return Err(Error::Invalid(format!("{} expects domain {:?}", self.name, self.domain)));
        }
        let mut outs: Vec<Vec<Complex<S>>> =
            self.codomain.iter().map(|b| Vec::with_capacity(self.blocks.len() * b.rank())).collect();
        for (m, block) in self.blocks.iter().enumerate() {
            let x: Vec<Complex<S>> =
                input.iter().flat_map(|s| (0..s.bundle().rank()).map(move |c| s.coeff(m, c).clone())).collect();
            let mut row = 0;
            for (part, b) in self.codomain.iter().enumerate() {
                for _ in 0..b.rank() {
                    let mut acc = czero::<S>();
                    for (e, xi) in block[row].iter().zip(&x) {
                        if !e.is_zero() {
                            acc = acc + e.clone() * xi.clone();
                        }
                    }
                    outs[part].push(acc);
                    row += 1;
                }
            }
        }
        Ok(self.codomain.iter().zip(outs).map(|(b, coeffs)| FourierSection::from_raw(*b, coeffs)).collect())
    }

    /// Max entry of `self − other` (in units of the common scale).
    pub fn difference(&self, other: &Self) -> Result<S> {
        self.same_modes(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch { left: self.rows * self.cols, right: other.rows * other.cols });
        }
        let mut worst = S::zero();
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            for (ra, rb) in a.iter().zip(b) {
                for (x, y) in ra.iter().zip(rb) {
                    let d = x.clone() - y.clone();
                    for v in [d.re.abs(), d.im.abs()] {
                        if v > worst {
                            worst = v;
                        }
                    }
                }
            }
        }
        Ok(worst)
    }

    pub fn describe(&self) -> Value {
        let (r, c) = self.shape();
        json!({
            "name": self.name,
            "domain": self.domain.iter().map(|b| b.label()).collect::<Vec<_>>(),
            "codomain": self.codomain.iter().map(|b| b.label()).collect::<Vec<_>>(),
            "modes": self.modes.len(),
            "block_shape": [self.rows, self.cols],
            "shape": [r, c],
        })
    }
}

// ---------------------------------------------------------------------------
// Assembly from exterior-algebra formulas.

/// `∇_v` on the mode `k`, divided by `π`: `2i Σ k_i v_i`.
fn symbol<S: Scalar>(k: [i64; 4], v: &ComplexVector<S>) -> Complex<S> {
    let mut re = S::zero();
    let mut im = S::zero();
    for (i, &ki) in k.iter().enumerate() {
        if ki != 0 {
            let c = v.component(i + 1);
            re = re + c.re * S::from_i64(ki);
            im = im + c.im * S::from_i64(ki);
        }
    }
    // 2i(re + i im) = −2 im + 2i re
    Complex::new(-(im * S::from_i64(2)), re * S::from_i64(2))
}

/// Frame and coefficient functionals of each bundle, as forms on ℝ⁸ whose
/// normal-vector coefficient is tracked separately (the normal frame is
/// parallel, so operators act on each coefficient form independently).
struct Frames<S> {
    dzb: Vec<ComplexMultivector<S>>,
    d_z: Vec<ComplexVector<S>>,
    d_zb: Vec<ComplexVector<S>>,
}

impl<S: Scalar> Frames<S> {
    fn new(j: &ComplexStructure) -> Self {
        Self {
            dzb: (1..=4).map(|k| j.dz_bar(k)).collect(),
            d_z: (1..=4).map(|k| j.d_dz(k)).collect(),
            d_zb: (1..=4).map(|k| j.d_dz_bar(k)).collect(),
        }
    }

    fn one(&self) -> ComplexMultivector<S> {
        ComplexMultivector::scalar(8, Complex::new(S::one(), S::zero()))
    }
}

/// `∂̄β = Σ_a dz̄_a ∧ ∇_{∂_{z̄_a}} β` over the tangent directions.
fn dbar_form<S: Scalar>(f: &Frames<S>, k: [i64; 4], beta: &ComplexMultivector<S>) -> Result<ComplexMultivector<S>> {
    let mut out = ComplexMultivector::zero(8);
    for a in 0..2 {
        out = &out + &f.dzb[a].wedge(&beta.scale(&symbol(k, &f.d_zb[a])))?;
    }
    Ok(out)
}

/// `∂̄*β = −2 Σ_a ι_{∂_{z̄_a}} ∇_{∂_{z_a}} β`.
fn dbar_star_form<S: Scalar>(
    f: &Frames<S>,
    k: [i64; 4],
    beta: &ComplexMultivector<S>,
) -> Result<ComplexMultivector<S>> {
    let mut out = ComplexMultivector::zero(8);
    for a in 0..2 {
        out = &out + &beta.scale(&symbol(k, &f.d_z[a])).hook(&f.d_zb[a])?;
    }
    Ok(out.scale_real(&S::from_i64(-2)))
}

/// `∂*β = −2 Σ_a ι_{∂_{z_a}} ∇_{∂_{z̄_a}} β`.
fn del_star_form<S: Scalar>(f: &Frames<S>, k: [i64; 4], beta: &ComplexMultivector<S>) -> Result<ComplexMultivector<S>> {
    let mut out = ComplexMultivector::zero(8);
    for a in 0..2 {
        out = &out + &beta.scale(&symbol(k, &f.d_zb[a])).hook(&f.d_z[a])?;
    }
    Ok(out.scale_real(&S::from_i64(-2)))
}

/// A normal-vector-valued form `Σ_b β_b ⊗ ∂_{z_b}` (`b = 3, 4`).
type Valued<S> = [ComplexMultivector<S>; 2];

fn valued_basis<S: Scalar>(f: &Frames<S>, bundle: Bundle) -> Vec<Valued<S>> {
    let zero = ComplexMultivector::zero(8);
    let put = |b: usize, form: ComplexMultivector<S>| {
        let mut v = [zero.clone(), zero.clone()];
        v[b] = form;
        v
    };
    match bundle {
        Bundle::Normal => (0..2).map(|b| put(b, f.one())).collect(),
        Bundle::Forms01 => {
            let mut out = Vec::new();
            for a in 0..2 {
                for b in 0..2 {
                    out.push(put(b, f.dzb[a].clone()));
                }
            }
            out
        }
        Bundle::Forms02 => {
            let w = f.dzb[0].wedge(&f.dzb[1]).expect("dimension 8");
            (0..2).map(|b| put(b, w.clone())).collect()
        }
        _ => unreachable!("not a normal-vector-valued bundle"),
    }
}

fn valued_coords<S: Scalar>(f: &Frames<S>, bundle: Bundle, v: &Valued<S>) -> Result<Vec<Complex<S>>> {
    let mut out = Vec::new();
    match bundle {
        Bundle::Forms01 => {
            for a in 0..2 {
                for b in 0..2 {
                    out.push(v[b].evaluate(&[f.d_zb[a].clone()])?);
                }
            }
        }
        Bundle::Forms02 => {
            for b in 0..2 {
                out.push(v[b].evaluate(&[f.d_zb[0].clone(), f.d_zb[1].clone()])?);
            }
        }
        _ => unreachable!("not a form-valued codomain"),
    }
    Ok(out)
}

fn assemble<S: Scalar>(
    model: &TorusModel<S>,
    name: &str,
    domain: Vec<Bundle>,
    codomain: Vec<Bundle>,
    column: impl Fn([i64; 4], usize) -> Result<Vec<Complex<S>>>,
) -> Result<OperatorMatrix<S>> {
    let cols: usize = domain.iter().map(|b| b.rank()).sum();
    let rows: usize = codomain.iter().map(|b| b.rank()).sum();
    // The block is linear in k: assemble it from the four unit modes.
    let mut generators: Vec<Block<S>> = Vec::with_capacity(4);
    for i in 0..4 {
        let mut k = [0i64; 4];
        k[i] = 1;
        let mut g = vec![vec![czero::<S>(); cols]; rows];
        for c in 0..cols {
            let col = column(k, c)?;
            if col.len() != rows {
                return Err(Error::DimensionMismatch { left: rows, right: col.len() });
            }
            for (r, e) in col.into_iter().enumerate() {
                g[r][c] = e;
            }
        }
        generators.push(g);
    }
    let blocks = model
        .modes()
        .iter()
        .map(|k| {
            let mut b = vec![vec![czero::<S>(); cols]; rows];
            for (i, g) in generators.iter().enumerate() {
                if k[i] == 0 {
                    continue;
                }
                let ki = S::from_i64(k[i]);
                for r in 0..rows {
                    for c in 0..cols {
                        if !g[r][c].is_zero() {
                            b[r][c] = b[r][c].clone() + g[r][c].clone() * ki.clone();
                        }
                    }
                }
            }
            b
        })
        .collect();
    Ok(OperatorMatrix {
        name: name.into(),
        domain,
        codomain,
        modes: model.modes().to_vec(),
        rows,
        cols,
        blocks,
        scale: std::f64::consts::PI,
    })
}

/// Action of a first-order operator on one basis section at one mode.
type ModeAction<S> = fn(&Frames<S>, [i64; 4], &ComplexMultivector<S>) -> Result<ComplexMultivector<S>>;

fn valued_operator<S: Scalar>(
    model: &TorusModel<S>,
    name: &str,
    from: Bundle,
    to: Bundle,
    op: ModeAction<S>,
) -> Result<OperatorMatrix<S>> {
    let f = Frames::new(model.j());
    let basis = valued_basis(&f, from);
    assemble(model, name, vec![from], vec![to], |k, c| {
        let v = &basis[c];
        let image = [op(&f, k, &v[0])?, op(&f, k, &v[1])?];
        valued_coords(&f, to, &image)
    })
}

/// `∂̄ : ν^{1,0} → Λ^{0,1}N ⊗ ν^{1,0}`.
pub fn dbar_matrix<S: Scalar>(model: &TorusModel<S>) -> Result<OperatorMatrix<S>> {
    valued_operator(model, "dbar", Bundle::Normal, Bundle::Forms01, dbar_form)
}

/// `∂̄ : Λ^{0,1}N ⊗ ν^{1,0} → Λ^{0,2}N ⊗ ν^{1,0}`.
pub fn dbar_forms_matrix<S: Scalar>(model: &TorusModel<S>) -> Result<OperatorMatrix<S>> {
    valued_operator(model, "dbar_01", Bundle::Forms01, Bundle::Forms02, dbar_form)
}

/// `∂̄* : Λ^{0,2}N ⊗ ν^{1,0} → Λ^{0,1}N ⊗ ν^{1,0}`, assembled from
/// `−2 Σ ι_{∂_{z̄_a}} ∇_{∂_{z_a}}`.
pub fn dbar_star_matrix<S: Scalar>(model: &TorusModel<S>) -> Result<OperatorMatrix<S>> {
    valued_operator(model, "dbar_star", Bundle::Forms02, Bundle::Forms01, dbar_star_form)
}

/// `∂̄ ⊕ ∂̄* : ν^{1,0} ⊕ Λ^{0,2}N⊗ν^{1,0} → Λ^{0,1}N⊗ν^{1,0}`.
pub fn dirac_matrix<S: Scalar>(model: &TorusModel<S>) -> Result<OperatorMatrix<S>> {
    dbar_matrix(model)?.hstack(&dbar_star_matrix(model)?, "dirac")
}

/// Formal adjoint of [`dirac_matrix`].
pub fn adjoint_matrix<S: Scalar>(model: &TorusModel<S>) -> Result<OperatorMatrix<S>> {
    dirac_matrix(model)?.weighted_adjoint("dirac_adjoint")
}

/// The prefactor `i^{p+j} (−1)^{p(p−1)/2 + 1 + j}`.
pub fn complex_prefactor<S: Scalar>(p: usize, j: usize) -> Complex<S> {
    let sign = if (p * (p.saturating_sub(1)) / 2 + 1 + j).is_multiple_of(2) { 1 } else { -1 };
    let (re, im) = match (p + j) % 4 {
        0 => (1, 0),
        1 => (0, 1),
        2 => (-1, 0),
        _ => (0, -1),
    };
    Complex::new(S::from_i64(sign * re), S::from_i64(sign * im))
}

/// `v ↦ c_j (∂*(v⌟Ω) + (−1)^{p+j} ∂̄*(v⌟Ω̄))` with `p = 2`, on
/// `v = v₁ ⊕ v₂ ∈ ν^{1,0} ⊕ ν^{0,1}`, into
/// `Λ^{1,0}N⊗ν^{*1,0} ⊕ Λ^{0,1}N⊗ν^{*0,1}`.
pub fn complex_linear_op<S: Scalar>(model: &TorusModel<S>, j: usize) -> Result<OperatorMatrix<S>> {
    let p = 2;
    let f = Frames::new(model.j());
    let omega = model.cy().holomorphic_volume().clone();
    let omega_bar = omega.conj();
    let pre = complex_prefactor::<S>(p, j);
    let bar_sign = S::from_i64(if (p + j).is_multiple_of(2) { 1 } else { -1 });
    let vectors: Vec<ComplexVector<S>> = f.d_z[2..].iter().cloned().chain(f.d_zb[2..].iter().cloned()).collect();
    assemble(
        model,
        &format!("complex_linear_j{j}"),
        vec![Bundle::Normal, Bundle::AntiNormal],
        vec![Bundle::Forms10Dual, Bundle::Forms01Dual],
        |k, c| {
            let v = &vectors[c];
            let a = del_star_form(&f, k, &omega.hook(v)?)?;
            let b = dbar_star_form(&f, k, &omega_bar.hook(v)?)?.scale_real(&bar_sign);
            let total = (&a + &b).scale(&pre);
            let mut out = Vec::with_capacity(8);
            for (first, second) in [(&f.d_z, &f.d_z), (&f.d_zb, &f.d_zb)] {
                for a in 0..2 {
                    for cn in 2..4 {
                        out.push(total.evaluate(&[first[a].clone(), second[cn].clone()])?);
                    }
                }
            }
            Ok(out)
        },
    )
}

// ---------------------------------------------------------------------------
// Kernels.

#[derive(Debug, Clone, PartialEq)]
pub struct KernelReport {
    pub operator: String,
    pub complex_dim: usize,
    pub real_dim: usize,
    pub width: usize,
    pub sigma_max: f64,
    /// Smallest singular value kept out of the kernel.
    pub smallest_retained: Option<f64>,
    /// Largest singular value counted in the kernel.
    pub largest_discarded: Option<f64>,
    /// `log₁₀(smallest_retained / largest_discarded)`, with the discarded
    /// side floored at `ε·σ_max`.
    pub gap_orders: Option<f64>,
    pub warning: Option<String>,
}

impl KernelReport {
    pub fn to_json(&self) -> Value {
        json!({
            "operator": self.operator,
            "kernel_dims": { "complex": self.complex_dim, "real": self.real_dim },
            "width": self.width,
            "sigma_max": self.sigma_max,
            "smallest_retained": self.smallest_retained,
            "largest_discarded": self.largest_discarded,
            "gap_orders": self.gap_orders,
            "warning": self.warning,
        })
    }
}

/// Singular values of every block, with the right-singular null vectors.
fn block_svd(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return (Vec::new(), DMatrix::identity(c, c));
    }
    // Pad to square so that V is complete even for wide blocks.
    let n = r.max(c);
    let mut sq = DMatrix::zeros(n, c);
    sq.view_mut((0, 0), (r, c)).copy_from(m);
    let svd = sq.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.truncate(c);
    (sv, v_t.adjoint())
}

/// Number of singular values below `tol · σ_max` over all blocks, counting
/// columns beyond the row count of wide blocks as zero singular values.
pub fn kernel_dim<S: Scalar>(op: &OperatorMatrix<S>, tol: f64) -> KernelReport {
    let mut all = Vec::new();
    for i in 0..op.blocks.len() {
        all.extend(block_svd(&op.block_f64(i)).0);
    }
    let sigma_max = all.iter().copied().fold(0.0, f64::max);
    let threshold = tol * sigma_max;
    let (small, big): (Vec<f64>, Vec<f64>) = all.iter().partition(|&&s| s <= threshold);
    let complex_dim = small.len();
    let smallest_retained = big.iter().copied().reduce(f64::min);
    let largest_discarded = small.iter().copied().reduce(f64::max);
    let gap_orders = smallest_retained.map(|lo| {
        let floor = f64::EPSILON * sigma_max;
        (lo / largest_discarded.unwrap_or(0.0).max(floor)).log10()
    });
    let near = all.iter().filter(|&&s| s > threshold / 100.0 && s < threshold * 100.0).count();
    let warning = (near > 0).then(|| format!("{near} singular values within two orders of the threshold"));
    KernelReport {
        operator: op.name.clone(),
        complex_dim,
        real_dim: 2 * complex_dim,
        width: op.shape().1,
        sigma_max,
        smallest_retained,
        largest_discarded,
        gap_orders,
        warning,
    }
}

/// Orthonormal kernel basis of each block (columns).
pub fn null_spaces<S: Scalar>(op: &OperatorMatrix<S>, tol: f64) -> Vec<DMatrix<Complex64>> {
    let svds: Vec<(Vec<f64>, DMatrix<Complex64>)> = (0..op.blocks.len()).map(|i| block_svd(&op.block_f64(i))).collect();
    let sigma_max = svds.iter().flat_map(|(s, _)| s.iter().copied()).fold(0.0, f64::max);
    let threshold = tol * sigma_max;
    svds.into_iter()
        .map(|(sv, v)| {
            let idx: Vec<usize> = (0..op.cols).filter(|&i| sv.get(i).is_none_or(|&s| s <= threshold)).collect();
            DMatrix::from_fn(op.cols, idx.len(), |r, c| v[(r, idx[c])])
        })
        .collect()
}

fn projector(basis: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    basis * basis.adjoint()
}

/// Largest blockwise `‖P_A − P_B‖` between two families of subspaces.
pub fn span_distance(a: &[DMatrix<Complex64>], b: &[DMatrix<Complex64>]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { left: a.len(), right: b.len() });
    }
    let mut worst: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        if x.nrows() != y.nrows() {
            return Err(Error::DimensionMismatch { left: x.nrows(), right: y.nrows() });
        }
        if x.ncols() != y.ncols() {
            return Ok(f64::INFINITY);
        }
        if x.ncols() > 0 {
            worst = worst.max((projector(x) - projector(y)).norm());
        }
    }
    Ok(worst)
}

/// Block-diagonal embedding `ker A ⊕ ker B` in the domain of `[A | B]`.
pub fn direct_sum(a: &[DMatrix<Complex64>], b: &[DMatrix<Complex64>]) -> Vec<DMatrix<Complex64>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let mut m = DMatrix::zeros(x.nrows() + y.nrows(), x.ncols() + y.ncols());
            m.view_mut((0, 0), x.shape()).copy_from(x);
            m.view_mut((x.nrows(), x.ncols()), y.shape()).copy_from(y);
            m
        })
        .collect()
}

/// `|⟨A a, b⟩ − ⟨a, B b⟩|` over `samples` random Gaussian-rational sections,
/// in units of the operator scale; zero exactly when `B` is the adjoint of `A`.
pub fn adjointness_residual<S: Scalar, R: Rng + ?Sized>(
    model: &TorusModel<S>,
    a: &OperatorMatrix<S>,
    b: &OperatorMatrix<S>,
    samples: usize,
    rng: &mut R,
) -> Result<S> {
    let mut worst = S::zero();
    for _ in 0..samples {
        let xa: Vec<FourierSection<S>> =
            a.domain.iter().map(|&t| FourierSection::random_rational(model, t, 5, 3, rng)).collect();
        let yb: Vec<FourierSection<S>> =
            b.domain.iter().map(|&t| FourierSection::random_rational(model, t, 5, 3, rng)).collect();
        let ax = a.apply_units(&xa)?;
        let by = b.apply_units(&yb)?;
        let mut lhs = czero::<S>();
        for (u, v) in ax.iter().zip(&yb) {
            lhs = lhs + u.inner(v)?;
        }
        let mut rhs = czero::<S>();
        for (u, v) in xa.iter().zip(&by) {
            rhs = rhs + u.inner(v)?;
        }
        let d = lhs - rhs;
        for v in [d.re.abs(), d.im.abs()] {
            if v > worst {
                worst = v;
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::scalar::Rational;

    type Q = Rational;

    fn model(k: usize) -> TorusModel<Q> {
        TorusModel::new(k).unwrap()
    }

    #[test]
    fn single_mode_symbol() {
        let m = model(1);
        let d = dbar_matrix(&m).unwrap();
        let idx = m.mode_index([1, 0, 0, 0]).unwrap();
        // ∂_{z̄₁} e^{2πi x₁} = πi e^{2πi x₁}; coefficient of dz̄₁ ⊗ ∂_{z₃} from f ∂_{z₃}
        assert_eq!(d.block(idx)[0][0], Complex::new(Q::from_i64(0), Q::from_i64(1)));
        let idx = m.mode_index([0, 1, 0, 0]).unwrap();
        // ∂_{z̄₁} e^{2πi x₂} = ½·i·2πi = −π
        assert_eq!(d.block(idx)[0][0], Complex::new(Q::from_i64(-1), Q::from_i64(0)));
    }

    #[test]
    fn dbar_star_matches_closed_form() {
        // ∂̄*(g dz̄₁₂) = 2∂_{z₂}g dz̄₁ − 2∂_{z₁}g dz̄₂
        let m = model(1);
        let s = dbar_star_matrix(&m).unwrap();
        let k = [1, 0, 1, 1];
        let blk = s.block(m.mode_index(k).unwrap());
        let dz1 = Complex::new(Q::from_i64(0), Q::from_i64(k[0])) + Complex::new(Q::from_i64(k[1]), Q::from_i64(0));
        let dz2 = Complex::new(Q::from_i64(0), Q::from_i64(k[2])) + Complex::new(Q::from_i64(k[3]), Q::from_i64(0));
        let two = Q::from_i64(2);
        // rows (a,b): (1,3),(1,4),(2,3),(2,4); column b
        assert_eq!(blk[0][0], dz2.clone() * two.clone());
        assert_eq!(blk[2][0], -(dz1.clone() * two.clone()));
        assert_eq!(blk[1][1], dz2 * two.clone());
        assert_eq!(blk[3][1], -(dz1 * two));
        assert!(blk[1][0].is_zero() && blk[0][1].is_zero());
    }

    #[test]
    fn adjointness_exact() {
        let m = model(1);
        let d01 = dbar_forms_matrix(&m).unwrap();
        let ds = dbar_star_matrix(&m).unwrap();
        assert_eq!(d01.weighted_adjoint("adj").unwrap().difference(&ds).unwrap(), Q::from_i64(0));
        let mut rng = linalg::seeded_rng(1, 0);
        assert_eq!(adjointness_residual(&m, &d01, &ds, 3, &mut rng).unwrap(), Q::from_i64(0));
        let dirac = dirac_matrix(&m).unwrap();
        let adj = adjoint_matrix(&m).unwrap();
        assert_eq!(adjointness_residual(&m, &dirac, &adj, 3, &mut rng).unwrap(), Q::from_i64(0));
    }

    #[test]
    fn kernel_dimensions() {
        for k in 0..=2 {
            let m = model(k);
            assert_eq!(kernel_dim(&dbar_matrix(&m).unwrap(), DEFAULT_KERNEL_TOL).complex_dim, 2);
            assert_eq!(kernel_dim(&dbar_star_matrix(&m).unwrap(), DEFAULT_KERNEL_TOL).complex_dim, 2);
            let d = kernel_dim(&dirac_matrix(&m).unwrap(), DEFAULT_KERNEL_TOL);
            assert_eq!((d.complex_dim, d.real_dim), (4, 8));
            assert_eq!(kernel_dim(&adjoint_matrix(&m).unwrap(), DEFAULT_KERNEL_TOL).complex_dim, 4);
            if k > 0 {
                assert!(d.gap_orders.unwrap() >= 6.0, "{:?}", d);
            }
        }
    }

    #[test]
    fn kernel_dim_generic() {
        let z = OperatorMatrix::<f64>::dense("zero", vec![vec![Complex64::new(0.0, 0.0); 5]; 3], 1.0).unwrap();
        assert_eq!(kernel_dim(&z, 1e-8).complex_dim, 5);
        let mut rng = linalg::seeded_rng(5, 0);
        let rows: Vec<Vec<Complex64>> = (0..6)
            .map(|_| (0..6).map(|_| Complex64::new(linalg::gaussian(&mut rng), linalg::gaussian(&mut rng))).collect())
            .collect();
        let r = OperatorMatrix::dense("random", rows, 1.0).unwrap();
        assert_eq!(kernel_dim(&r, 1e-8).complex_dim, 0);
    }

    #[test]
    fn dirac_kernel_is_direct_sum() {
        let m = model(1);
        let tol = DEFAULT_KERNEL_TOL;
        let kd = null_spaces(&dbar_matrix(&m).unwrap(), tol);
        let ks = null_spaces(&dbar_star_matrix(&m).unwrap(), tol);
        let kdirac = null_spaces(&dirac_matrix(&m).unwrap(), tol);
        assert!(span_distance(&kdirac, &direct_sum(&kd, &ks)).unwrap() < 1e-10);
    }

    #[test]
    fn complex_linear_kernels() {
        let m = model(1);
        let tol = DEFAULT_KERNEL_TOL;
        let p0 = complex_linear_op(&m, 0).unwrap();
        let p1 = complex_linear_op(&m, 1).unwrap();
        let both = p0.vstack(&p1, "both").unwrap();
        assert_eq!(kernel_dim(&both, tol).complex_dim, 4);
        assert_eq!(kernel_dim(&p0, tol).complex_dim, 4);
        let del = p0.columns(0, 2, vec![Bundle::Normal], "del_star_part");
        let kd = null_spaces(&dbar_matrix(&m).unwrap(), tol);
        assert!(span_distance(&null_spaces(&del, tol), &kd).unwrap() < 1e-10);
        assert_eq!(complex_prefactor::<Q>(2, 0), Complex::new(Q::from_i64(-1), Q::from_i64(0)));
        assert_eq!(complex_prefactor::<Q>(2, 1), Complex::new(Q::from_i64(0), Q::from_i64(1)));
    }
}
