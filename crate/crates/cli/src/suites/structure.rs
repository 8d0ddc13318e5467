//! Algebraic structure: the Cayley form, the `Λ²₇ ⊕ Λ²₂₁` splitting, the
//! Calabi–Yau normalizations, the frame formula for τ and the fiberwise
//! bundle isomorphisms.

use cayley_core::exterior::Multivector;
use cayley_core::graphs::{e_isom_checks, normal_isom, normal_isom_inverse, InverseNormalization};
use cayley_core::linalg::seeded_rng;
use cayley_core::spin7::{phi0_model, PHI0_TERMS};
use cayley_core::{
    CalabiYauModel, CayleyForm, ComplexVector, Phase, Rational, Scalar, TypedVector, Vector, VectorType,
};
use num_complex::Complex;
use rand::Rng;
use serde_json::json;

use super::{larger, max_of, small_ratio, stream};
use crate::config::SuiteConfig;
use crate::error::Result;
use crate::report::{Check, Status};

pub const DEFAULT_ISOM_SAMPLES: usize = 20;
const FRAME_SAMPLES: usize = 20;

pub fn run(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    if cfg.exact() {
        run_with::<Rational>(cfg)
    } else {
        run_with::<f64>(cfg)
    }
}

fn run_with<S: Scalar>(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let mut rng = seeded_rng(cfg.seed, stream::STRUCTURE);
    let mut checks = cayley_form_checks::<S>(cfg)?;
    checks.extend(splitting_checks::<S>(cfg)?);
    checks.extend(calabi_yau_checks::<S>(cfg)?);
    checks.push(frame_formula_check::<S, _>(cfg, &mut rng)?);
    checks.extend(isomorphism_checks::<S, _>(cfg, &mut rng)?);
    Ok(checks)
}

fn cayley_form_checks<S: Scalar>(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let tol = cfg.tol;
    let literal = CayleyForm::<S>::phi0();
    let derived = CayleyForm::from_cy(&phi0_model::<S>())?;
    let phi = derived.phi();

    let coeff_err = max_of(PHI0_TERMS.iter().map(|(idx, s)| phi.coeff(idx) - S::from_i64(*s)));
    let full_err = (phi - literal.phi()).max_abs();
    let terms = phi.terms().filter(|(_, c)| !c.is_negligible(tol)).count();
    let residual = larger(coeff_err, full_err);
    let coefficients = Check::scalar(
        "structure.phi0.coefficients",
        "½ω∧ω + Re Ω of the Calabi–Yau model with J-signs (+,+,−,−) and phase π has exactly the 14 signed coefficients of the standard Cayley form",
        &residual,
        tol,
    );
    let ok = coefficients.status == Status::Pass && terms == 14;
    let coefficients = coefficients.with_status(Status::from_bool(ok)).with_details(json!({
        "nonzero_terms": terms,
        "expected_terms": 14,
        "model": phi0_model::<S>().describe(),
    }));

    let phi = literal.phi();
    let self_dual = (&phi.hodge_star() - phi).max_abs();
    let square = (&phi.wedge(phi)? - &Multivector::volume(8).scale(&S::from_i64(14))).max_abs();
    Ok(vec![
        coefficients,
        Check::scalar("structure.phi0.self_dual", "the Cayley form is self-dual: *Φ = Φ", &self_dual, tol),
        Check::scalar("structure.phi0.square", "Φ∧Φ = 14 vol", &square, tol),
    ])
}

fn splitting_checks<S: Scalar>(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let tol = cfg.tol;
    let phi = CayleyForm::<S>::phi0();
    let rank7 = phi.pi7_rank(tol);
    let rank21 = phi.complement_rank(tol);

    let spanning: Vec<Vec<S>> = phi.lambda27_spanning_set().iter().map(Multivector::two_form_coords).collect();
    let span_rank = cayley_core::linalg::rank(&spanning, tol);
    // Columns of π₇ span its image; adding them must not raise the rank.
    let pi7 = phi.pi7_matrix();
    let mut combined = spanning.clone();
    combined.extend((0..pi7.len()).map(|c| pi7.iter().map(|row| row[c].clone()).collect()));
    let joint_rank = cayley_core::linalg::rank(&combined, tol);

    let (ratio, ratio_residual) = phi.projection_ratio();
    let ratio_err = larger((ratio.clone() - S::from_i64(2)).abs(), ratio_residual.clone());

    Ok(vec![
        Check::count("structure.lambda2.pi7_rank", "π₇ on 2-forms has rank 7", rank7.abs_diff(7))
            .with_details(json!({ "rank": rank7, "expected": 7 })),
        Check::count(
            "structure.lambda2.complement_rank",
            "the complement of Λ²₇ in Λ² has rank 21",
            rank21.abs_diff(21),
        )
        .with_details(json!({ "rank": rank21, "expected": 21 })),
        Check::count(
            "structure.lambda2.l27_span",
            "the forms e^i∧e^j − e_i⌟(e_j⌟Φ) span exactly the image of π₇",
            span_rank.abs_diff(7) + joint_rank.abs_diff(7),
        )
        .with_details(json!({ "span_rank": span_rank, "joint_rank_with_pi7_image": joint_rank, "expected": 7 })),
        Check::scalar(
            "structure.lambda2.pi7_normalization",
            "the decomposable-formula π₇ is twice the orthogonal projection onto Λ²₇",
            &ratio_err,
            tol,
        )
        .with_details(json!({ "ratio": ratio.to_json(), "identity_residual": ratio_residual.to_json() })),
    ])
}

fn models<S: Scalar>(exact: bool) -> Result<Vec<CalabiYauModel<S>>> {
    let mut phases: Vec<Phase<S>> = (0..4).map(Phase::quarter_turns).collect();
    phases.push(Phase::pythagorean(3, 4, 5)?);
    phases.push(Phase::pythagorean(-5, 12, 13)?);
    if !exact {
        let (c, s) = (S::from_f64(0.7f64.cos()), S::from_f64(0.7f64.sin()));
        phases.push(Phase::new(c.expect("finite"), s.expect("finite"), 1e-12)?);
    }
    let mut out = Vec::new();
    for m in 1..=4 {
        for ph in &phases {
            out.push(CalabiYauModel::new(m, ph.clone())?);
        }
    }
    out.push(phi0_model());
    Ok(out)
}

fn calabi_yau_checks<S: Scalar>(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let models = models::<S>(cfg.exact())?;
    let normalization = max_of(models.iter().map(CalabiYauModel::verify_normalization));
    let mut hooks = S::zero();
    for model in &models {
        for k in 1..=model.m() {
            hooks = larger(hooks, model.hook_identities_check(k)?);
        }
    }
    let details = json!({ "models": models.len(), "complex_dims": [1, 2, 3, 4] });
    Ok(vec![
        Check::scalar(
            "structure.calabi_yau.normalization",
            "ωᵐ/m! = (−1)^{m(m−1)/2} (i/2)ᵐ Ω∧Ω̄ for every model",
            &normalization,
            cfg.tol,
        )
        .with_details(details.clone()),
        Check::scalar(
            "structure.calabi_yau.hook_identities",
            "e⌟Ω = −i Je⌟Ω and e⌟Ω̄ = i Je⌟Ω̄ for every model and basis vector",
            &hooks,
            cfg.tol,
        )
        .with_details(details),
    ])
}

/// An orthonormal 4-frame with rational entries: the first four basis
/// vectors moved by a few rotations with Pythagorean cosines.
pub(crate) fn rational_frame<S: Scalar, R: Rng + ?Sized>(rng: &mut R) -> Vec<Vector<S>> {
    const TRIPLES: [(i64, i64, i64); 3] = [(3, 4, 5), (5, 12, 13), (8, 15, 17)];
    let mut frame: Vec<Vec<S>> = (1..=4).map(|i| Vector::<S>::basis(8, i).comps().to_vec()).collect();
    for _ in 0..6 {
        let a = rng.random_range(0..8);
        let b = (a + rng.random_range(1..8)) % 8;
        let (x, y, z) = TRIPLES[rng.random_range(0..TRIPLES.len())];
        let (c, s) = (S::from_ratio(x, z), S::from_ratio(y, z));
        for row in frame.iter_mut() {
            let (u, v) = (row[a].clone(), row[b].clone());
            row[a] = c.clone() * u.clone() - s.clone() * v.clone();
            row[b] = s.clone() * u + c.clone() * v;
        }
    }
    frame.into_iter().map(Vector::new).collect()
}

fn frame_formula_check<S: Scalar, R: Rng + ?Sized>(cfg: &SuiteConfig, rng: &mut R) -> Result<Check> {
    let phi = CayleyForm::<S>::phi0();
    let mut worst = S::zero();
    let mut frames = 0;
    // all 70 coordinate 4-planes, then rotated rational frames
    for a in 1..=8 {
        for b in a + 1..=8 {
            for c in b + 1..=8 {
                for d in c + 1..=8 {
                    let f: Vec<Vector<S>> = [a, b, c, d].iter().map(|&i| Vector::basis(8, i)).collect();
                    worst = larger(worst, tau_frame_residual(&phi, &f)?);
                    frames += 1;
                }
            }
        }
    }
    for _ in 0..FRAME_SAMPLES {
        worst = larger(worst, tau_frame_residual(&phi, &rational_frame::<S, _>(rng))?);
        frames += 1;
    }
    Ok(Check::scalar(
        "structure.tau.frame_formula",
        "τ = Σᵢ (eⁱ∧(e₁⌟Φ) − e¹∧(eᵢ⌟Φ)) ⊗ π₇(e¹∧eⁱ) agrees with the cyclic definition of τ",
        &worst,
        cfg.tol,
    )
    .with_details(json!({ "frames": frames })))
}

fn tau_frame_residual<S: Scalar>(phi: &CayleyForm<S>, f: &[Vector<S>]) -> Result<S> {
    let a = phi.tau_on(f)?;
    let b = phi.tau_frame_formula(f)?;
    Ok((a.form() - b.form()).max_abs())
}

fn complex_max<S: Scalar>(v: &ComplexVector<S>) -> S {
    max_of(v.re.comps().iter().chain(v.im.comps()).cloned())
}

fn isomorphism_checks<S: Scalar, R: Rng + ?Sized>(cfg: &SuiteConfig, rng: &mut R) -> Result<Vec<Check>> {
    let tol = cfg.tol;
    let model = phi0_model::<S>();
    let j = model.j().clone();
    let samples = cfg.samples_or(DEFAULT_ISOM_SAMPLES);

    let mut round_trip = S::zero();
    let mut unscaled = S::zero();
    let four = Complex::new(S::from_i64(4), S::zero());
    for _ in 0..samples {
        let mut z = || Complex::new(small_ratio::<S, _>(rng, 9, 4), small_ratio::<S, _>(rng, 9, 4));
        let v = &j.d_dz_bar::<S>(3).scale(&z()) + &j.d_dz_bar::<S>(4).scale(&z());
        let tv = TypedVector::new(&j, v.clone(), VectorType::AntiHolomorphic, tol)?;
        let form = normal_isom(&model, &tv)?;
        let back = normal_isom_inverse(&model, &form, InverseNormalization::Corrected, tol)?;
        round_trip = larger(round_trip, complex_max(&(back.vector() - &v)));
        let raw = normal_isom_inverse(&model, &form, InverseNormalization::Unscaled, tol)?;
        unscaled = larger(unscaled, complex_max(&(raw.vector() - &v.scale(&four))));
    }
    let raw_check = Check::scalar(
        "structure.normal_isom.unscaled_inverse",
        "without the factor ¼ the inverse map returns 4v; the two-sided inverse carries −¼",
        &unscaled,
        tol,
    );
    let raw_status = if raw_check.status == Status::Pass { Status::Warn } else { Status::Fail };

    let e = e_isom_checks(&model, samples, rng)?;
    let details = e.to_json();
    let item =
        |name: &str, reference: &str, r: &S| Check::scalar(name, reference, r, tol).with_details(details.clone());
    Ok(vec![
        Check::scalar(
            "structure.normal_isom.round_trip",
            "v ↦ ¼(v⌟Ω̄)♯ is an isomorphism ν^{0,1} → Λ^{0,2}N ⊗ ν^{1,0} with inverse −¼[*_N(α∧(v⌟Ω))]♯",
            &round_trip,
            tol,
        )
        .with_details(json!({ "samples": samples })),
        raw_check.with_status(raw_status).with_details(json!({ "samples": samples })),
        item(
            "structure.pi7.mixed_antiholomorphic",
            "π₇(v∧w) = v∧w + ¼Ω(v♯,w♯,·,·) for v ∈ Λ^{0,1}N, w ∈ ν^{*0,1}",
            &e.mixed_antiholomorphic,
        ),
        item(
            "structure.pi7.mixed_holomorphic",
            "π₇(v∧w) = v∧w + ¼Ω̄(v♯,w♯,·,·) for v ∈ Λ^{1,0}N, w ∈ ν^{*1,0}",
            &e.mixed_holomorphic,
        ),
        item("structure.pi7.cross_types", "π₇ vanishes on Λ^{1,0}N ⊗ ν^{*0,1} and Λ^{0,1}N ⊗ ν^{*1,0}", &e.cross_terms),
        item(
            "structure.pi7.tangent_self_dual",
            "π₇(β)|_N = ½(β + *_N β) for tangent 2-forms of type (2,0), (0,2) and (1,1)",
            &e.tangent_self_dual,
        ),
    ])
}
