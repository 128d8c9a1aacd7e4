//! Haar-random code ensembles.
//!
//! A `K`-dimensional code is drawn as the span of a Haar-random `M×K`
//! isometry. The ensemble average of `‖D‖²_F` has the closed form
//!
//! ```text
//! ⟨‖D‖²_F⟩ = (1 - K⁻²)/(M² - 1) Σ_ij (tr W_ij†W_ij - |tr W_ij|²/M),  W_ij = A_i†A_j
//! ```
//!
//! which is bounded by `‖N(π)‖²_F` and, through `‖D‖₁ ≤ √(K|N|) ‖D‖_F` and
//! Jensen, yields `⟨p - ‖D‖₁⟩ ≥ tr N(π) - √(K|N|) ‖N(π)‖_F`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{classify, KrausChannel};
use crate::code_fidelity::{fidelity_lower_bound_kraus, CodeSubspace};
use crate::error::{Error, Result};
use crate::matrix::{haar_isometry, haar_unitary, ComplexMatrix, C64};
use crate::montecarlo::{estimate_many, EnsembleEstimate, EnsembleSpec, SIGMA_THRESHOLD};

/// Agreement tolerance used when an ensemble is deterministic (`K = M`).
pub const DETERMINISTIC_TOL: f64 = 1e-12;

/// Span of a Haar-random `M×K` isometry.
pub fn sample_code<R: Rng + ?Sized>(ambient_dim: usize, code_dim: usize, rng: &mut R) -> Result<CodeSubspace> {
    if code_dim == 0 || code_dim > ambient_dim {
        return Err(Error::InvalidParameter(format!(
            "code dimension {code_dim} must lie in 1..={ambient_dim}"
        )));
    }
    CodeSubspace::new(haar_isometry(ambient_dim, code_dim, rng))
}

fn check_code_dim(ch: &KrausChannel, code_dim: usize) -> Result<usize> {
    let m = ch.input_dim();
    if m < 2 {
        return Err(Error::InvalidParameter(
            "ensemble averages need input dimension >= 2".into(),
        ));
    }
    if code_dim == 0 || code_dim > m {
        return Err(Error::InvalidParameter(format!(
            "code dimension {code_dim} must lie in 1..={m}"
        )));
    }
    Ok(m)
}

/// Closed-form ensemble average of `‖D‖²_F`.
pub fn exact_average_d2(ch: &KrausChannel, code_dim: usize) -> Result<f64> {
    let m = check_code_dim(ch, code_dim)? as f64;
    let k = code_dim as f64;
    let mut sum = 0.0;
    for a in ch.kraus() {
        for b in ch.kraus() {
            let w = a.adjoint() * b;
            sum += w.norm_squared() - w.trace().norm_sqr() / m;
        }
    }
    Ok((1.0 - 1.0 / (k * k)) / (m * m - 1.0) * sum)
}

/// `‖N(π)‖²_F`, an upper bound on [`exact_average_d2`] for every `K`.
pub fn upper_bound_d2(ch: &KrausChannel) -> f64 {
    ch.output_on_uniform().norm_squared()
}

/// `tr N(π) - √(K|N|) ‖N(π)‖_F` with `|N|` the minimal Kraus length.
pub fn averaged_fidelity_bound(ch: &KrausChannel, code_dim: usize) -> f64 {
    let out = ch.output_on_uniform();
    let len = ch.minimal_length() as f64;
    out.trace().re - (code_dim as f64 * len).sqrt() * out.norm()
}

/// Monte Carlo average of `p - ‖D‖₁` over Haar codes.
pub fn mc_average_bound(ch: &KrausChannel, code_dim: usize, samples: usize, seed: u64) -> Result<EnsembleEstimate> {
    let spec = EnsembleSpec::new(ch.input_dim(), code_dim, samples, seed)?;
    Ok(run_ensemble(ch, &spec)?.bound)
}

/// Monte Carlo average of `‖D‖²_F` over Haar codes.
pub fn mc_average_d2(ch: &KrausChannel, code_dim: usize, samples: usize, seed: u64) -> Result<EnsembleEstimate> {
    let spec = EnsembleSpec::new(ch.input_dim(), code_dim, samples, seed)?;
    Ok(run_ensemble(ch, &spec)?.d_frobenius_sq)
}

/// Per-statistic estimates from one pass over the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStatistics {
    /// `p - ‖D‖₁`.
    pub bound: EnsembleEstimate,
    pub d_trace_norm: EnsembleEstimate,
    pub d_frobenius_sq: EnsembleEstimate,
}

/// Samples `spec.sample_count` codes and evaluates the Kraus-form bound on each.
/// The channel is reduced to a minimal Kraus family first, which leaves every
/// statistic unchanged and keeps `D` small.
pub fn run_ensemble(ch: &KrausChannel, spec: &EnsembleSpec) -> Result<EnsembleStatistics> {
    if spec.ambient_dim != ch.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "ensemble over dimension {} for a channel on dimension {}",
            spec.ambient_dim,
            ch.input_dim()
        )));
    }
    let minimal = ch.diagonalize();
    let (m, k) = (spec.ambient_dim, spec.code_dim);
    let est = estimate_many(spec.sample_count, spec.master_seed, |rng| {
        let code = CodeSubspace::new(haar_isometry(m, k, rng)).expect("Haar isometry is orthonormal");
        let r = fidelity_lower_bound_kraus(&code, &minimal).expect("dimensions checked");
        vec![r.bound_kraus, r.trace_norm_d, r.frobenius_d_sq]
    });
    Ok(EnsembleStatistics {
        bound: est[0],
        d_trace_norm: est[1],
        d_frobenius_sq: est[2],
    })
}

/// Monte Carlo estimates next to their closed forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub spec: EnsembleSpec,
    pub minimal_length: usize,
    pub estimates: EnsembleStatistics,
    pub exact_average_d2: f64,
    pub upper_bound_d2: f64,
    pub averaged_fidelity_bound: f64,
    /// `√(K|N|) √⟨‖D‖²_F⟩`, the majorant of `⟨‖D‖₁⟩`.
    pub trace_norm_majorant: f64,
    /// Whether the ensemble is deterministic (`K = M`).
    pub deterministic: bool,
    pub d2_matches_closed_form: bool,
    pub d2_below_upper_bound: bool,
    pub bound_above_averaged_bound: bool,
    pub trace_norm_below_majorant: bool,
}

/// `|estimate - target| ≤ σ·SE`, widened by [`DETERMINISTIC_TOL`] so that
/// rounding noise in zero-variance ensembles does not register as a failure.
pub fn statistically_equal(e: &EnsembleEstimate, target: f64) -> bool {
    (e.mean - target).abs() <= SIGMA_THRESHOLD * e.std_error + DETERMINISTIC_TOL
}

/// Full ensemble experiment: Monte Carlo statistics with closed-form checks.
pub fn ensemble_report(ch: &KrausChannel, spec: &EnsembleSpec) -> Result<EnsembleReport> {
    let exact = exact_average_d2(ch, spec.code_dim)?;
    let estimates = run_ensemble(ch, spec)?;
    let upper = upper_bound_d2(ch);
    let averaged = averaged_fidelity_bound(ch, spec.code_dim);
    let len = ch.minimal_length();
    let majorant = ((spec.code_dim * len) as f64).sqrt() * exact.sqrt();
    let s = SIGMA_THRESHOLD;
    Ok(EnsembleReport {
        spec: *spec,
        minimal_length: len,
        exact_average_d2: exact,
        upper_bound_d2: upper,
        averaged_fidelity_bound: averaged,
        trace_norm_majorant: majorant,
        deterministic: spec.code_dim == spec.ambient_dim,
        d2_matches_closed_form: statistically_equal(&estimates.d_frobenius_sq, exact),
        d2_below_upper_bound: exact <= upper + DETERMINISTIC_TOL,
        bound_above_averaged_bound: estimates.bound.mean
            >= averaged - s * estimates.bound.std_error - DETERMINISTIC_TOL,
        trace_norm_below_majorant: estimates.d_trace_norm.mean
            <= majorant + s * estimates.d_trace_norm.std_error + DETERMINISTIC_TOL,
        estimates,
    })
}

/// Coefficients of `b(V, W) = α tr V†W + β tr V† tr W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BFormCoefficients {
    pub alpha: f64,
    pub beta: f64,
}

impl BFormCoefficients {
    pub fn evaluate(&self, v: &ComplexMatrix, w: &ComplexMatrix) -> C64 {
        v.dotc(w) * self.alpha + v.trace().conj() * w.trace() * self.beta
    }
}

/// `α = (1 - K⁻²)/(M² - 1)`, `β = -α/M`.
pub fn b_form_coefficients(ambient_dim: usize, code_dim: usize) -> Result<BFormCoefficients> {
    if ambient_dim < 2 {
        return Err(Error::InvalidParameter("the invariant form needs M >= 2".into()));
    }
    if code_dim == 0 || code_dim > ambient_dim {
        return Err(Error::InvalidParameter(format!(
            "code dimension {code_dim} must lie in 1..={ambient_dim}"
        )));
    }
    let (m, k) = (ambient_dim as f64, code_dim as f64);
    let alpha = (1.0 - 1.0 / (k * k)) / (m * m - 1.0);
    Ok(BFormCoefficients {
        alpha,
        beta: -alpha / m,
    })
}

/// Estimate of a complex-valued ensemble average, one estimate per component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEstimate {
    pub re: EnsembleEstimate,
    pub im: EnsembleEstimate,
}

impl ComplexEstimate {
    pub fn agrees_with(&self, target: C64) -> bool {
        statistically_equal(&self.re, target.re) && statistically_equal(&self.im, target.im)
    }
}

/// `tr(π_C V† π_C W) - tr(π_C V†) tr(π_C W) / K` for one code basis `P`.
pub fn b_form_sample(p: &ComplexMatrix, v: &ComplexMatrix, w: &ComplexMatrix) -> C64 {
    let k = p.ncols() as f64;
    let pv = p.adjoint() * v.adjoint() * p;
    let pw = p.adjoint() * w * p;
    (&pv * &pw).trace() / (k * k) - pv.trace() * pw.trace() / (k * k * k)
}

/// Monte Carlo average of the invariant form `b(V, W)` over Haar codes.
pub fn b_form_mc(
    v: &ComplexMatrix,
    w: &ComplexMatrix,
    code_dim: usize,
    samples: usize,
    seed: u64,
) -> Result<ComplexEstimate> {
    let m = v.nrows();
    if !v.is_square() || v.shape() != w.shape() {
        return Err(Error::DimensionMismatch(
            "V and W must be square and of equal size".into(),
        ));
    }
    EnsembleSpec::new(m, code_dim, samples, seed)?;
    let est = estimate_many(samples, seed, |rng| {
        let p = haar_isometry(m, code_dim, rng);
        let b = b_form_sample(&p, v, w);
        vec![b.re, b.im]
    });
    Ok(ComplexEstimate { re: est[0], im: est[1] })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub name: String,
    pub estimate: EnsembleEstimate,
    pub target: f64,
    pub z_score: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub ambient_dim: usize,
    pub code_dim: usize,
    pub moments: Vec<MomentCheck>,
    pub all_pass: bool,
}

/// Fourth-order Haar moments against their closed forms:
/// `⟨|U₁₁|⁴⟩ = 2/(M²+M)`, `⟨|U₁₁|²|U₁₂|²⟩ = 1/(M²+M)` and
/// `⟨⟨ψ|π_C|ψ⟩²⟩ = (1 + 1/K)/(M²+M)`.
pub fn haar_moment_suite(ambient_dim: usize, code_dim: usize, samples: usize, seed: u64) -> Result<MomentReport> {
    if ambient_dim < 2 {
        return Err(Error::InvalidParameter("moments need M >= 2".into()));
    }
    EnsembleSpec::new(ambient_dim, code_dim, samples, seed)?;
    let m = ambient_dim as f64;
    let k = code_dim as f64;
    let est = estimate_many(samples, seed, |rng| {
        let u = haar_unitary(ambient_dim, rng);
        let a = u[(0, 0)].norm_sqr();
        let b = u[(0, 1)].norm_sqr();
        let overlap: f64 = (0..code_dim).map(|j| u[(0, j)].norm_sqr()).sum::<f64>() / k;
        vec![a * a, a * b, overlap * overlap]
    });
    let targets = [
        ("abs_u11_pow4", 2.0 / (m * m + m)),
        ("abs_u11_sq_abs_u12_sq", 1.0 / (m * m + m)),
        ("code_overlap_sq", (1.0 + 1.0 / k) / (m * m + m)),
    ];
    let moments: Vec<MomentCheck> = targets
        .iter()
        .zip(est)
        .map(|(&(name, target), estimate)| MomentCheck {
            name: name.to_string(),
            z_score: estimate.z_score(target),
            pass: statistically_equal(&estimate, target),
            estimate,
            target,
        })
        .collect();
    Ok(MomentReport {
        ambient_dim,
        code_dim,
        all_pass: moments.iter().all(|c| c.pass),
        moments,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HammingRow {
    pub n: usize,
    /// `⌊2^{nR}⌋`.
    pub code_dim: f64,
    /// `1 - (2^R |U| / |Q'|)^{n/2}`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HammingCurve {
    pub rate: f64,
    pub output_dim: usize,
    pub length: usize,
    /// `log2 |Q'| - log2 |U|`.
    pub rate_limit: f64,
    /// `R < rate_limit`: the bound tends to 1.
    pub converges: bool,
    pub rows: Vec<HammingRow>,
}

/// Averaged fidelity bound for block codes of rate `R` over a unital channel.
pub fn hamming_rate_curve(ch: &KrausChannel, rate: f64, n_min: usize, n_max: usize) -> Result<HammingCurve> {
    if !classify(ch)?.is_unital {
        return Err(Error::NotUnital(unital_defect(ch)));
    }
    if n_min == 0 || n_min > n_max {
        return Err(Error::InvalidParameter(format!(
            "bad block-length range {n_min}..={n_max}"
        )));
    }
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "rate {rate} must be a non-negative number"
        )));
    }
    let q = ch.output_dim();
    let len = ch.minimal_length();
    let ratio = rate.exp2() * len as f64 / q as f64;
    let rows = (n_min..=n_max)
        .map(|n| HammingRow {
            n,
            code_dim: (n as f64 * rate).exp2().floor(),
            bound: 1.0 - ratio.powf(n as f64 / 2.0),
        })
        .collect();
    let rate_limit = (q as f64).log2() - (len as f64).log2();
    Ok(HammingCurve {
        rate,
        output_dim: q,
        length: len,
        rate_limit,
        converges: rate < rate_limit,
        rows,
    })
}

fn unital_defect(ch: &KrausChannel) -> f64 {
    let q = ch.output_dim();
    let diff = ch.output_on_uniform() - ComplexMatrix::identity(q, q).unscale(q as f64);
    crate::matrix::trace_norm(&diff)
}

/// Monte Carlo check that the ensemble average of `π_C` is `π`: returns the
/// largest entrywise deviation of the sample mean from `1/M`.
pub fn mean_projector_deviation(ambient_dim: usize, code_dim: usize, samples: usize, seed: u64) -> Result<f64> {
    EnsembleSpec::new(ambient_dim, code_dim, samples, seed)?;
    let m = ambient_dim;
    let cols = crate::montecarlo::sample_values(samples, seed, |rng| {
        let p = haar_isometry(m, code_dim, rng);
        let pi = (&p * p.adjoint()).unscale(code_dim as f64);
        pi.iter().flat_map(|z| [z.re, z.im]).collect()
    });
    let mut worst = 0.0f64;
    for (idx, col) in cols.iter().enumerate() {
        let mean = crate::matrix::pairwise_sum(col) / samples as f64;
        let entry = idx / 2;
        let target = if idx % 2 == 0 && entry % m == entry / m {
            1.0 / m as f64
        } else {
            0.0
        };
        worst = worst.max((mean - target).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_fidelity::d_frobenius_sq_direct;
    use crate::matrix::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sample_code_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = sample_code(5, 2, &mut rng).unwrap();
        assert_eq!((c.ambient_dim(), c.code_dim()), (5, 2));
        let full = sample_code(3, 3, &mut rng).unwrap();
        assert!((full.projector() - ComplexMatrix::identity(3, 3)).norm() < 1e-12);
        assert!(sample_code(2, 3, &mut rng).is_err());
    }

    #[test]
    fn mean_projector_is_maximally_mixed() {
        let dev = mean_projector_deviation(3, 1, 10_000, 4).unwrap();
        // entries of π_C have spread ≤ 1, so 4/√n bounds the deviation generously
        assert!(dev < 0.04, "{dev}");
    }

    #[test]
    fn exact_average_examples() {
        let id = KrausChannel::identity(4).unwrap();
        assert_eq!(exact_average_d2(&id, 2).unwrap(), 0.0);
        assert!(exact_average_d2(&KrausChannel::identity(1).unwrap(), 1).is_err());
        assert!(exact_average_d2(&id, 5).is_err());
        for p in [0.1, 0.25, 0.5] {
            let pf = KrausChannel::phase_flip(p).unwrap();
            let full = CodeSubspace::standard(2, 2).unwrap();
            let direct = d_frobenius_sq_direct(&full, &pf).unwrap();
            assert!((exact_average_d2(&pf, 2).unwrap() - direct).abs() < DETERMINISTIC_TOL);
        }
    }

    #[test]
    fn exact_average_below_upper_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for t in 0..100 {
            let m = 2 + t % 4;
            let ch = KrausChannel::haar_random(m, 1 + t % 3, 1 + t % 4, &mut rng);
            let Ok(ch) = ch else { continue };
            for k in 1..=m {
                assert!(exact_average_d2(&ch, k).unwrap() <= upper_bound_d2(&ch) + 1e-12);
            }
        }
    }

    #[test]
    fn upper_bound_examples() {
        assert!((upper_bound_d2(&KrausChannel::identity(2).unwrap()) - 0.5).abs() < 1e-15);
        let dep = KrausChannel::depolarizing(0.3, 3).unwrap();
        assert!((upper_bound_d2(&dep) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn averaged_bound_examples() {
        let id = KrausChannel::identity(4).unwrap();
        assert!((averaged_fidelity_bound(&id, 1) - 0.5).abs() < 1e-14);
        let pf = KrausChannel::phase_flip(0.25).unwrap();
        assert!((averaged_fidelity_bound(&pf, 2) - (1.0 - 2.0 * 0.5f64.sqrt() * 1.0)).abs() < 1e-14);
        assert!(averaged_fidelity_bound(&pf, 2) < 0.0);
        // redundant Kraus operators do not weaken the bound
        let a = ComplexMatrix::identity(2, 2).scale(0.5f64.sqrt());
        let dup = KrausChannel::new(vec![a.clone(), a]).unwrap();
        assert!(
            (averaged_fidelity_bound(&dup, 1) - averaged_fidelity_bound(&KrausChannel::identity(2).unwrap(), 1)).abs()
                < 1e-14
        );
    }

    #[test]
    fn identity_ensemble_is_exact() {
        let id = KrausChannel::identity(3).unwrap();
        let e = mc_average_bound(&id, 2, 50, 1).unwrap();
        assert!((e.mean - 1.0).abs() < 1e-12);
        assert!(e.std_error < 1e-12);
    }

    #[test]
    fn mc_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = KrausChannel::haar_random(3, 3, 2, &mut rng).unwrap();
        let spec = EnsembleSpec::new(3, 2, 4000, 9).unwrap();
        let r = ensemble_report(&ch, &spec).unwrap();
        assert!(r.d2_matches_closed_form, "{r:?}");
        assert!(r.bound_above_averaged_bound);
        assert!(r.trace_norm_below_majorant);
        assert!(r.d2_below_upper_bound);
    }

    #[test]
    fn phase_flip_single_state_codes() {
        let pf = KrausChannel::phase_flip(0.25).unwrap();
        let e = mc_average_bound(&pf, 1, 1000, 5).unwrap();
        // one-dimensional codes have D = 0, so each sample equals p = 1
        assert!((e.mean - 1.0).abs() < 1e-12);
        assert!(e.mean >= averaged_fidelity_bound(&pf, 1) - 4.0 * e.std_error);
    }

    #[test]
    fn b_form_identity_vanishes_per_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let id = ComplexMatrix::identity(4, 4);
        for k in 1..=4 {
            let p = haar_isometry(4, k, &mut rng);
            assert!(b_form_sample(&p, &id, &id).norm() < 1e-14);
        }
    }

    #[test]
    fn b_form_coefficients_examples() {
        let c = b_form_coefficients(2, 2).unwrap();
        assert!((c.alpha - 0.25).abs() < 1e-15 && (c.beta + 0.125).abs() < 1e-15);
        for (m, k) in [(2, 1), (3, 2), (5, 3), (6, 6)] {
            let c = b_form_coefficients(m, k).unwrap();
            let (mf, kf) = (m as f64, k as f64);
            assert!((c.alpha + c.beta - (1.0 - 1.0 / (kf * kf)) / (mf * mf + mf)).abs() < 1e-15);
            assert!((c.alpha * mf + c.beta * mf * mf).abs() < 1e-15);
        }
        assert!(b_form_coefficients(1, 1).is_err());
    }

    #[test]
    fn b_form_matches_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = 3;
        let v = random_hermitian(m, &mut rng) + ComplexMatrix::identity(m, m).scale(0.3);
        let w = crate::matrix::complex_gaussian(m, m, &mut rng);
        for k in [1, 2] {
            let est = b_form_mc(&v, &w, k, 20_000, 6).unwrap();
            let target = b_form_coefficients(m, k).unwrap().evaluate(&v, &w);
            assert!(est.agrees_with(target), "k={k}: {est:?} vs {target}");
        }
        let psi = crate::matrix::basis_vector(m, 1);
        let proj = &psi * psi.adjoint();
        let est = b_form_mc(&proj, &proj, 2, 20_000, 7).unwrap();
        let target = (1.0 - 0.25) / (9.0 + 3.0);
        assert!(est.agrees_with(C64::new(target, 0.0)));
    }

    #[test]
    fn moment_suite_small() {
        let r = haar_moment_suite(2, 1, 20_000, 8).unwrap();
        assert!((r.moments[0].target - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.moments[1].target - 1.0 / 6.0).abs() < 1e-15);
        assert!(r.all_pass, "{r:?}");
        let r3 = haar_moment_suite(3, 3, 2_000, 8).unwrap();
        assert!((r3.moments[0].target - 1.0 / 6.0).abs() < 1e-15);
        assert!((r3.moments[2].target - 1.0 / 9.0).abs() < 1e-15);
        assert!(r3.moments[2].pass);
    }

    #[test]
    fn hamming_curves() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let q2 = KrausChannel::haar_random_unitary(2, 2, &mut rng).unwrap();
        let c = hamming_rate_curve(&q2, 0.5, 1, 10).unwrap();
        assert!(!c.converges && c.rows.iter().all(|r| r.bound <= 0.0));
        let q4 = KrausChannel::haar_random_unitary(4, 2, &mut rng).unwrap();
        let c = hamming_rate_curve(&q4, 0.5, 1, 40).unwrap();
        assert!(c.converges);
        assert!(c.rows.windows(2).all(|w| w[1].bound > w[0].bound));
        assert!(c.rows.last().unwrap().bound > 0.9);
        let edge = hamming_rate_curve(&q4, 1.0, 1, 5).unwrap();
        assert!(edge.rows.iter().all(|r| r.bound.abs() < 1e-12));
        let ad = KrausChannel::amplitude_damping(0.3).unwrap();
        assert!(matches!(hamming_rate_curve(&ad, 0.1, 1, 3), Err(Error::NotUnital(_))));
    }
}
