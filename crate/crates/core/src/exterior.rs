//! Exterior algebra of ℝⁿ (n ≤ 8) with the Euclidean metric and the standard
//! orientation `e_1 ∧ … ∧ e_n`.
//!
//! Basis blades are bitmasks: bit `i - 1` set means `e_i` is a factor. Blade
//! factors are always taken in increasing index order, so a blade is the
//! canonical form of its index tuple.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAX_DIM: usize = 8;

pub type Blade = u16;

pub fn blade_grade(b: Blade) -> usize {
    b.count_ones() as usize
}

/// 1-based indices of a blade, increasing.
pub fn blade_indices(b: Blade) -> Vec<usize> {
    (0..16).filter(|i| b & (1 << i) != 0).map(|i| i + 1).collect()
}

/// Canonicalize an index tuple: `Some((negative, blade))` where `negative` is
/// the parity of the sorting permutation, `None` if an index repeats.
pub fn canonical_blade(indices: &[usize]) -> Option<(bool, Blade)> {
    let mut blade: Blade = 0;
    let mut negative = false;
    for &i in indices {
        assert!((1..=16).contains(&i), "blade index {i} out of range");
        let bit = 1 << (i - 1);
        if blade & bit != 0 {
            return None;
        }
        // every already-placed factor with a larger index is jumped over
        negative ^= (blade >> i).count_ones() % 2 == 1;
        blade |= bit;
    }
    Some((negative, blade))
}

/// Sign of `e_A ∧ e_B = ± e_{A∪B}` for disjoint blades: parity of pairs
/// `i ∈ A, j ∈ B` with `i > j`.
#[inline]
pub fn wedge_negative(a: Blade, b: Blade) -> bool {
    let mut count = 0;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        count += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    count % 2 == 1
}

fn full_blade(dim: usize) -> Blade {
    ((1u32 << dim) - 1) as Blade
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        Err(Error::DimensionOutOfRange { dim, max: MAX_DIM })
    } else {
        Ok(())
    }
}

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left: a, right: b })
    }
}

// ---------------------------------------------------------------------------
// Vectors

#[derive(Debug, Clone, PartialEq)]
pub struct Vector<S> {
    comps: Vec<S>,
}

impl<S: Scalar> Vector<S> {
    pub fn new(comps: Vec<S>) -> Self {
        Self { comps }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { comps: vec![S::zero(); dim] }
    }

    /// The standard basis vector `e_i` (1-based).
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.comps[i - 1] = S::one();
        v
    }

    pub fn from_i64(comps: &[i64]) -> Self {
        Self::new(comps.iter().map(|&c| S::from_i64(c)).collect())
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comps(&self) -> &[S] {
        &self.comps
    }

    /// Component along `e_i` (1-based).
    pub fn get(&self, i: usize) -> &S {
        &self.comps[i - 1]
    }

    pub fn dot(&self, other: &Self) -> S {
        self.comps.iter().zip(&other.comps).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    pub fn norm_sq(&self) -> S {
        self.dot(self)
    }

    pub fn scale(&self, s: &S) -> Self {
        Self::new(self.comps.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Zero::is_zero)
    }

    pub fn to_f64(&self) -> Vector<f64> {
        Vector::new(self.comps.iter().map(Scalar::to_f64).collect())
    }

    /// The metric dual 1-form `v♭`.
    pub fn flat(&self) -> Multivector<S> {
        let mut m = Multivector::zero(self.dim());
        for (i, c) in self.comps.iter().enumerate() {
            m.accumulate(1 << i, c.clone());
        }
        m
    }
}

impl<S: Scalar> Add for &Vector<S> {
    type Output = Vector<S>;
    fn add(self, rhs: Self) -> Vector<S> {
        assert_eq!(self.dim(), rhs.dim(), "vector dimension mismatch");
        Vector::new(self.comps.iter().zip(&rhs.comps).map(|(a, b)| a.clone() + b.clone()).collect())
    }
}

impl<S: Scalar> Sub for &Vector<S> {
    type Output = Vector<S>;
    fn sub(self, rhs: Self) -> Vector<S> {
        assert_eq!(self.dim(), rhs.dim(), "vector dimension mismatch");
        Vector::new(self.comps.iter().zip(&rhs.comps).map(|(a, b)| a.clone() - b.clone()).collect())
    }
}

impl<S: Scalar> Neg for &Vector<S> {
    type Output = Vector<S>;
    fn neg(self) -> Vector<S> {
        Vector::new(self.comps.iter().map(|a| -a.clone()).collect())
    }
}

/// `a♯` for a 1-form.
pub fn musical_sharp<S: Scalar>(a: &Multivector<S>) -> Result<Vector<S>> {
    match a.grade() {
        Some(1) | None => {}
        Some(k) => return Err(Error::GradeMismatch { expected: 1, found: k }),
    }
    let mut v = Vector::zeros(a.dim());
    for (b, c) in a.terms() {
        v.comps[b.trailing_zeros() as usize] = c.clone();
    }
    Ok(v)
}

pub fn musical_flat<S: Scalar>(v: &Vector<S>) -> Multivector<S> {
    v.flat()
}

// ---------------------------------------------------------------------------
// Multivectors

/// Sparse element of `Λ*(ℝⁿ)`; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Multivector<S> {
    dim: usize,
    terms: BTreeMap<Blade, S>,
}

impl<S: Scalar> Multivector<S> {
    pub fn zero(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} unsupported");
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn try_zero(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self::zero(dim))
    }

    pub fn scalar(dim: usize, s: S) -> Self {
        let mut m = Self::zero(dim);
        m.accumulate(0, s);
        m
    }

    /// `dx_{i1} ∧ … ∧ dx_{ik}` for an arbitrary (unsorted) index tuple.
    pub fn basis(dim: usize, indices: &[usize]) -> Result<Self> {
        Self::term(dim, indices, S::one())
    }

    pub fn term(dim: usize, indices: &[usize], coeff: S) -> Result<Self> {
        check_dim(dim)?;
        if let Some(&i) = indices.iter().find(|&&i| i == 0 || i > dim) {
            return Err(Error::IndexOutOfRange { index: i, dim });
        }
        let mut m = Self::zero(dim);
        if let Some((neg, blade)) = canonical_blade(indices) {
            m.accumulate(blade, if neg { -coeff } else { coeff });
        }
        Ok(m)
    }

    /// Sum of signed terms, e.g. `[(&[1, 2, 3, 4], 1), (&[1, 2, 5, 6], -1)]`.
    pub fn from_terms<'a>(dim: usize, terms: impl IntoIterator<Item = (&'a [usize], S)>) -> Result<Self> {
        let mut m = Self::try_zero(dim)?;
        for (idx, c) in terms {
            m = &m + &Self::term(dim, idx, c)?;
        }
        Ok(m)
    }

    /// The volume form `dx_1 ∧ … ∧ dx_n`.
    pub fn volume(dim: usize) -> Self {
        let mut m = Self::zero(dim);
        m.accumulate(full_blade(dim), S::one());
        m
    }

    pub(crate) fn accumulate(&mut self, blade: Blade, value: S) {
        if value.is_zero() {
            return;
        }
        match self.terms.get_mut(&blade) {
            Some(c) => {
                *c = c.clone() + value;
                if c.is_zero() {
                    self.terms.remove(&blade);
                }
            }
            None => {
                self.terms.insert(blade, value);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (Blade, &S)> {
        self.terms.iter().map(|(b, c)| (*b, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff_blade(&self, blade: Blade) -> S {
        self.terms.get(&blade).cloned().unwrap_or_else(S::zero)
    }

    /// Coefficient of `dx_{i1} ∧ … ∧ dx_{ik}` (any order; sign adjusted).
    pub fn coeff(&self, indices: &[usize]) -> S {
        match canonical_blade(indices) {
            Some((neg, b)) => {
                let c = self.coeff_blade(b);
                if neg {
                    -c
                } else {
                    c
                }
            }
            None => S::zero(),
        }
    }

    /// The common grade, `None` for zero or inhomogeneous elements.
    pub fn grade(&self) -> Option<usize> {
        let mut grades = self.terms.keys().map(|b| blade_grade(*b));
        let first = grades.next()?;
        grades.all(|g| g == first).then_some(first)
    }

    fn homogeneous_grade(&self) -> Result<Option<usize>> {
        if self.is_zero() {
            return Ok(None);
        }
        self.grade().map(Some).ok_or(Error::Inhomogeneous)
    }

    pub fn grade_part(&self, k: usize) -> Self {
        Self {
            dim: self.dim,
            terms: self.terms.iter().filter(|(b, _)| blade_grade(**b) == k).map(|(b, c)| (*b, c.clone())).collect(),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut m = Self::zero(self.dim);
        for (b, c) in &self.terms {
            m.accumulate(*b, c.clone() * s.clone());
        }
        m
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim, other.dim)?;
        let mut m = Self::zero(self.dim);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if a & b != 0 {
                    continue;
                }
                let v = ca.clone() * cb.clone();
                m.accumulate(a | b, if wedge_negative(*a, *b) { -v } else { v });
            }
        }
        Ok(m)
    }

    /// `e_i ⌟ self` (1-based `i`).
    pub fn hook_basis(&self, i: usize) -> Self {
        let bit: Blade = 1 << (i - 1);
        let mut m = Self::zero(self.dim);
        for (b, c) in &self.terms {
            if b & bit == 0 {
                continue;
            }
            let below = (b & (bit - 1)).count_ones();
            m.accumulate(b & !bit, if below % 2 == 1 { -c.clone() } else { c.clone() });
        }
        m
    }

    /// Interior product `v ⌟ self`, contracting the first slot.
    pub fn hook(&self, v: &Vector<S>) -> Result<Self> {
        same_dim(self.dim, v.dim())?;
        let mut m = Self::zero(self.dim);
        for (b, c) in &self.terms {
            let mut rest = *b;
            let mut position = 0u32;
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                let vi = &v.comps[i];
                if !vi.is_zero() {
                    let val = c.clone() * vi.clone();
                    m.accumulate(b & !(1 << i), if position % 2 == 1 { -val } else { val });
                }
                position += 1;
                rest &= rest - 1;
            }
        }
        Ok(m)
    }

    /// Successive contraction `ι_{vk} ⋯ ι_{v1} self`, i.e. fill the first
    /// `k` slots with `v1, …, vk`.
    pub fn contract(&self, vectors: &[Vector<S>]) -> Result<Self> {
        let mut m = self.clone();
        for v in vectors {
            m = m.hook(v)?;
        }
        Ok(m)
    }

    /// Value of a k-form on k vectors.
    pub fn evaluate(&self, vectors: &[Vector<S>]) -> Result<S> {
        match self.homogeneous_grade()? {
            Some(k) if k != vectors.len() => return Err(Error::GradeMismatch { expected: vectors.len(), found: k }),
            _ => {}
        }
        Ok(self.contract(vectors)?.coeff_blade(0))
    }

    /// Hodge star for the Euclidean metric: `*e_I = sign(I, Iᶜ) e_{Iᶜ}`, so
    /// that `a ∧ *b = ⟨a, b⟩ vol`.
    pub fn hodge_star(&self) -> Self {
        let full = full_blade(self.dim);
        let mut m = Self::zero(self.dim);
        for (b, c) in &self.terms {
            let comp = full & !b;
            m.accumulate(comp, if wedge_negative(*b, comp) { -c.clone() } else { c.clone() });
        }
        m
    }

    /// Induced inner product on forms of equal grade.
    pub fn inner(&self, other: &Self) -> Result<S> {
        same_dim(self.dim, other.dim)?;
        if let (Some(a), Some(b)) = (self.homogeneous_grade()?, other.homogeneous_grade()?) {
            if a != b {
                return Err(Error::GradeMismatch { expected: a, found: b });
            }
        }
        Ok(self.dot_coeffs(other))
    }

    /// Coefficient dot product without grade checks.
    pub fn dot_coeffs(&self, other: &Self) -> S {
        let mut acc = S::zero();
        for (b, c) in &self.terms {
            if let Some(d) = other.terms.get(b) {
                acc = acc + c.clone() * d.clone();
            }
        }
        acc
    }

    pub fn norm_sq(&self) -> S {
        self.dot_coeffs(self)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    /// Largest absolute coefficient in the backend's own arithmetic.
    pub fn max_abs(&self) -> S {
        self.terms.values().map(|c| c.abs()).fold(S::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn to_f64(&self) -> Multivector<f64> {
        let mut m = Multivector::zero(self.dim);
        for (b, c) in &self.terms {
            m.accumulate(*b, c.to_f64());
        }
        m
    }

    /// Drop coefficients with `|c| <= tol` (no-op on the exact backend).
    pub fn chop(&self, tol: f64) -> Self {
        Self {
            dim: self.dim,
            terms: self.terms.iter().filter(|(_, c)| !c.is_negligible(tol)).map(|(b, c)| (*b, c.clone())).collect(),
        }
    }

    /// Terms sorted by grade then lexicographically by index tuple.
    pub fn sorted_terms(&self) -> Vec<(Vec<usize>, S)> {
        let mut out: Vec<_> = self.terms.iter().map(|(b, c)| (blade_indices(*b), c.clone())).collect();
        out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
        out
    }

    /// JSON list of `{indices, coeff}` with rational coefficients as strings.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.sorted_terms().into_iter().map(|(idx, c)| json!({ "indices": idx, "coeff": c.to_json() })).collect(),
        )
    }

    /// Coefficients of a 2-form in the order `(1,2), (1,3), …, (n-1,n)`.
    pub fn two_form_coords(&self) -> Vec<S> {
        two_form_pairs(self.dim).into_iter().map(|(i, j)| self.coeff_blade((1 << (i - 1)) | (1 << (j - 1)))).collect()
    }

    pub fn from_two_form_coords(dim: usize, coords: &[S]) -> Self {
        let mut m = Self::zero(dim);
        for ((i, j), c) in two_form_pairs(dim).into_iter().zip(coords) {
            m.accumulate((1 << (i - 1)) | (1 << (j - 1)), c.clone());
        }
        m
    }
}

/// Index pairs `i < j` in lexicographic order.
pub fn two_form_pairs(dim: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(dim * (dim - 1) / 2);
    for i in 1..=dim {
        for j in i + 1..=dim {
            out.push((i, j));
        }
    }
    out
}

pub fn wedge<S: Scalar>(a: &Multivector<S>, b: &Multivector<S>) -> Result<Multivector<S>> {
    a.wedge(b)
}

/// `v ⌟ a`.
pub fn hook<S: Scalar>(v: &Vector<S>, a: &Multivector<S>) -> Result<Multivector<S>> {
    a.hook(v)
}

pub fn hodge_star<S: Scalar>(a: &Multivector<S>) -> Multivector<S> {
    a.hodge_star()
}

pub fn inner<S: Scalar>(a: &Multivector<S>, b: &Multivector<S>) -> Result<S> {
    a.inner(b)
}

impl<S: Scalar> Add for &Multivector<S> {
    type Output = Multivector<S>;
    fn add(self, rhs: Self) -> Multivector<S> {
        assert_eq!(self.dim, rhs.dim, "multivector dimension mismatch");
        let mut m = self.clone();
        for (b, c) in &rhs.terms {
            m.accumulate(*b, c.clone());
        }
        m
    }
}

impl<S: Scalar> Sub for &Multivector<S> {
    type Output = Multivector<S>;
    fn sub(self, rhs: Self) -> Multivector<S> {
        assert_eq!(self.dim, rhs.dim, "multivector dimension mismatch");
        let mut m = self.clone();
        for (b, c) in &rhs.terms {
            m.accumulate(*b, -c.clone());
        }
        m
    }
}

impl<S: Scalar> Neg for &Multivector<S> {
    type Output = Multivector<S>;
    fn neg(self) -> Multivector<S> {
        Multivector { dim: self.dim, terms: self.terms.iter().map(|(b, c)| (*b, -c.clone())).collect() }
    }
}

impl<S: Scalar> Mul<&S> for &Multivector<S> {
    type Output = Multivector<S>;
    fn mul(self, rhs: &S) -> Multivector<S> {
        self.scale(rhs)
    }
}

// ---------------------------------------------------------------------------
// Complexified forms and vectors

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector<S> {
    pub re: Vector<S>,
    pub im: Vector<S>,
}

impl<S: Scalar> ComplexVector<S> {
    pub fn new(re: Vector<S>, im: Vector<S>) -> Self {
        assert_eq!(re.dim(), im.dim(), "complex vector parts differ in dimension");
        Self { re, im }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(Vector::zeros(dim), Vector::zeros(dim))
    }

    pub fn real(re: Vector<S>) -> Self {
        let dim = re.dim();
        Self::new(re, Vector::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.re.dim()
    }

    pub fn scale(&self, z: &Complex<S>) -> Self {
        Self::new(&self.re.scale(&z.re) - &self.im.scale(&z.im), &self.re.scale(&z.im) + &self.im.scale(&z.re))
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -&self.im)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn component(&self, i: usize) -> Complex<S> {
        Complex::new(self.re.get(i).clone(), self.im.get(i).clone())
    }

    /// Hermitian product `Σ a_i conj(b_i)`.
    pub fn hermitian(&self, other: &Self) -> Complex<S> {
        Complex::new(self.re.dot(&other.re) + self.im.dot(&other.im), self.im.dot(&other.re) - self.re.dot(&other.im))
    }

    pub fn max_abs(&self) -> f64 {
        self.re.comps().iter().chain(self.im.comps()).map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn to_f64(&self) -> ComplexVector<f64> {
        ComplexVector::new(self.re.to_f64(), self.im.to_f64())
    }

    /// Complex-linear extension of `♭`.
    pub fn flat(&self) -> ComplexMultivector<S> {
        ComplexMultivector::new(self.re.flat(), self.im.flat())
    }
}

impl<S: Scalar> Add for &ComplexVector<S> {
    type Output = ComplexVector<S>;
    fn add(self, rhs: Self) -> ComplexVector<S> {
        ComplexVector::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl<S: Scalar> Sub for &ComplexVector<S> {
    type Output = ComplexVector<S>;
    fn sub(self, rhs: Self) -> ComplexVector<S> {
        ComplexVector::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

/// Complexified form stored as real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMultivector<S> {
    pub re: Multivector<S>,
    pub im: Multivector<S>,
}

impl<S: Scalar> ComplexMultivector<S> {
    pub fn new(re: Multivector<S>, im: Multivector<S>) -> Self {
        assert_eq!(re.dim(), im.dim(), "complex form parts differ in dimension");
        Self { re, im }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(Multivector::zero(dim), Multivector::zero(dim))
    }

    pub fn real(re: Multivector<S>) -> Self {
        let dim = re.dim();
        Self::new(re, Multivector::zero(dim))
    }

    pub fn scalar(dim: usize, z: Complex<S>) -> Self {
        Self::new(Multivector::scalar(dim, z.re), Multivector::scalar(dim, z.im))
    }

    pub fn dim(&self) -> usize {
        self.re.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -&self.im)
    }

    pub fn scale(&self, z: &Complex<S>) -> Self {
        Self::new(&self.re.scale(&z.re) - &self.im.scale(&z.im), &self.re.scale(&z.im) + &self.im.scale(&z.re))
    }

    pub fn scale_real(&self, s: &S) -> Self {
        Self::new(self.re.scale(s), self.im.scale(s))
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        let rr = self.re.wedge(&other.re)?;
        let ii = self.im.wedge(&other.im)?;
        let ri = self.re.wedge(&other.im)?;
        let ir = self.im.wedge(&other.re)?;
        Ok(Self::new(&rr - &ii, &ri + &ir))
    }

    pub fn hook(&self, v: &ComplexVector<S>) -> Result<Self> {
        let rr = self.re.hook(&v.re)?;
        let ii = self.im.hook(&v.im)?;
        let ri = self.re.hook(&v.im)?;
        let ir = self.im.hook(&v.re)?;
        Ok(Self::new(&rr - &ii, &ri + &ir))
    }

    pub fn hook_real(&self, v: &Vector<S>) -> Result<Self> {
        Ok(Self::new(self.re.hook(v)?, self.im.hook(v)?))
    }

    pub fn contract(&self, vectors: &[ComplexVector<S>]) -> Result<Self> {
        let mut m = self.clone();
        for v in vectors {
            m = m.hook(v)?;
        }
        Ok(m)
    }

    pub fn evaluate(&self, vectors: &[ComplexVector<S>]) -> Result<Complex<S>> {
        let c = self.contract(vectors)?;
        if let Some(k) = self.re.grade().or(self.im.grade()) {
            if k != vectors.len() {
                return Err(Error::GradeMismatch { expected: vectors.len(), found: k });
            }
        }
        Ok(Complex::new(c.re.coeff_blade(0), c.im.coeff_blade(0)))
    }

    pub fn hodge_star(&self) -> Self {
        Self::new(self.re.hodge_star(), self.im.hodge_star())
    }

    pub fn coeff(&self, indices: &[usize]) -> Complex<S> {
        Complex::new(self.re.coeff(indices), self.im.coeff(indices))
    }

    pub fn grade_part(&self, k: usize) -> Self {
        Self::new(self.re.grade_part(k), self.im.grade_part(k))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.re.max_abs_coeff().max(self.im.max_abs_coeff())
    }

    /// Largest absolute real or imaginary coefficient.
    pub fn max_abs(&self) -> S {
        let (a, b) = (self.re.max_abs(), self.im.max_abs());
        if a > b {
            a
        } else {
            b
        }
    }

    /// Number of stored real coefficients across both parts.
    pub fn real_term_count(&self) -> usize {
        self.re.len() + self.im.len()
    }

    pub fn to_f64(&self) -> ComplexMultivector<f64> {
        ComplexMultivector::new(self.re.to_f64(), self.im.to_f64())
    }

    /// Complex-linear extension of `♯` on 1-forms.
    pub fn sharp(&self) -> Result<ComplexVector<S>> {
        Ok(ComplexVector::new(musical_sharp(&self.re)?, musical_sharp(&self.im)?))
    }

    pub fn to_json(&self) -> Value {
        json!({ "re": self.re.to_json(), "im": self.im.to_json() })
    }
}

impl<S: Scalar> Add for &ComplexMultivector<S> {
    type Output = ComplexMultivector<S>;
    fn add(self, rhs: Self) -> ComplexMultivector<S> {
        ComplexMultivector::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl<S: Scalar> Sub for &ComplexMultivector<S> {
    type Output = ComplexMultivector<S>;
    fn sub(self, rhs: Self) -> ComplexMultivector<S> {
        ComplexMultivector::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl<S: Scalar> Neg for &ComplexMultivector<S> {
    type Output = ComplexMultivector<S>;
    fn neg(self) -> ComplexMultivector<S> {
        ComplexMultivector::new(-&self.re, -&self.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type Q = Rational;

    fn q(n: i64) -> Q {
        Q::from_i64(n)
    }

    #[test]
    fn basis_wedges() {
        let dx1 = Multivector::<Q>::basis(8, &[1]).unwrap();
        let dx2 = Multivector::<Q>::basis(8, &[2]).unwrap();
        assert_eq!(dx1.wedge(&dx2).unwrap(), Multivector::basis(8, &[1, 2]).unwrap());
        assert!(dx1.wedge(&dx1).unwrap().is_zero());
        assert_eq!(dx2.wedge(&dx1).unwrap().coeff(&[1, 2]), q(-1));
    }

    #[test]
    fn canonical_sign() {
        assert_eq!(canonical_blade(&[2, 1]), Some((true, 0b11)));
        assert_eq!(canonical_blade(&[3, 1, 2]), Some((false, 0b111)));
        assert_eq!(canonical_blade(&[1, 1]), None);
        let m = Multivector::<Q>::basis(4, &[4, 3, 2, 1]).unwrap();
        assert_eq!(m.coeff(&[1, 2, 3, 4]), q(1));
    }

    #[test]
    fn hook_basis_cases() {
        let a = Multivector::<Q>::basis(8, &[1, 2]).unwrap();
        assert_eq!(a.hook(&Vector::basis(8, 1)).unwrap(), Multivector::basis(8, &[2]).unwrap());
        assert_eq!(a.hook(&Vector::basis(8, 2)).unwrap().coeff(&[1]), q(-1));
        assert!(a.hook(&Vector::basis(8, 3)).unwrap().is_zero());
        assert_eq!(a.hook_basis(2), a.hook(&Vector::basis(8, 2)).unwrap());
    }

    #[test]
    fn star_basics() {
        let a = Multivector::<Q>::basis(8, &[1, 2, 3, 4]).unwrap();
        assert_eq!(a.hodge_star(), Multivector::basis(8, &[5, 6, 7, 8]).unwrap());
        assert_eq!(Multivector::<Q>::scalar(8, q(1)).hodge_star(), Multivector::volume(8));
        // *dx1 in ℝ² is dx2, *dx2 is -dx1
        let dx2 = Multivector::<Q>::basis(2, &[2]).unwrap();
        assert_eq!(dx2.hodge_star().coeff(&[1]), q(-1));
    }

    #[test]
    fn inner_products() {
        let a = Multivector::<Q>::basis(8, &[1, 2]).unwrap();
        let b = Multivector::<Q>::basis(8, &[1, 3]).unwrap();
        assert_eq!(a.inner(&a).unwrap(), q(1));
        assert_eq!(a.inner(&b).unwrap(), q(0));
        let c = Multivector::<Q>::basis(8, &[1]).unwrap();
        assert!(matches!(a.inner(&c), Err(Error::GradeMismatch { .. })));
    }

    #[test]
    fn evaluation_is_determinant() {
        let a = Multivector::<Q>::basis(3, &[1, 2]).unwrap();
        let u = Vector::from_i64(&[1, 2, 0]);
        let v = Vector::from_i64(&[3, 4, 0]);
        assert_eq!(a.evaluate(&[u.clone(), v.clone()]).unwrap(), q(-2));
        assert!(a.evaluate(&[u]).is_err());
    }

    #[test]
    fn musical_roundtrip_and_errors() {
        let v = Vector::<Q>::from_i64(&[0, 0, 1, 0]);
        assert_eq!(v.flat(), Multivector::basis(4, &[3]).unwrap());
        assert_eq!(musical_sharp(&Multivector::<Q>::basis(4, &[3]).unwrap()).unwrap(), v);
        assert!(musical_sharp(&Multivector::<Q>::basis(4, &[1, 3]).unwrap()).is_err());
    }

    #[test]
    fn dimension_errors() {
        let a = Multivector::<Q>::basis(4, &[1]).unwrap();
        let b = Multivector::<Q>::basis(5, &[1]).unwrap();
        assert!(matches!(a.wedge(&b), Err(Error::DimensionMismatch { .. })));
        assert!(Multivector::<Q>::basis(9, &[1]).is_err());
        assert!(Multivector::<Q>::basis(4, &[5]).is_err());
    }

    #[test]
    fn complex_wedge_of_dz() {
        // dz ∧ dz̄ = -2i dx ∧ dy
        let dz =
            ComplexMultivector::new(Multivector::<Q>::basis(2, &[1]).unwrap(), Multivector::basis(2, &[2]).unwrap());
        let w = dz.wedge(&dz.conj()).unwrap();
        assert!(w.re.is_zero());
        assert_eq!(w.im.coeff(&[1, 2]), q(-2));
    }

    #[test]
    fn json_shape() {
        let a =
            Multivector::<Q>::from_terms(4, [(&[1usize, 2][..], q(1)), (&[3usize][..], Q::from_ratio(1, 2))]).unwrap();
        let j = a.to_json();
        assert_eq!(j[0]["indices"], json!([3]));
        assert_eq!(j[0]["coeff"], json!("1/2"));
        assert_eq!(j[1]["indices"], json!([1, 2]));
    }
}
