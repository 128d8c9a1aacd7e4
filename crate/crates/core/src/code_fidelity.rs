//! Codes, entanglement fidelity and the computable fidelity lower bound.
//!
//! For a code `C` with basis `P` (an `M×K` isometry) and a channel with
//! Kraus operators `A_i`, the bound is `p - ‖D‖₁`, where `p = tr N(π_C)` and
//! `D` is the traceless Hermitian operator on `C ⊗ E` with blocks
//!
//! ```text
//! B_ij = (G_ij - tr(G_ij) 1/K) / K,   G_ij = (A_i P)† (A_j P).
//! ```
//!
//! The same number arises from the output state of a purification of
//! `π_C`: `p - p‖ρ'_RE - ρ_R ⊗ ρ'_E‖₁`. Both evaluations are provided so each
//! can check the other.

use serde::{Deserialize, Serialize};

use crate::channels::{joint_output, matrix_from_rows, matrix_to_rows, KrausChannel};
use crate::error::{Error, Result};
use crate::matrix::{
    eigenvalues_hermitian, hermitian_part, purify, reduced_state, ComplexMatrix, ComplexVector, DensityOperator,
};

/// Orthonormality tolerance for code bases.
pub const BASIS_TOL: f64 = 1e-10;
/// Transmission below this makes the normalised output state undefined.
pub const MIN_TRANSMISSION: f64 = 1e-12;

/// A `K`-dimensional subspace of `C^M`, stored as an `M×K` isometry.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSubspace {
    basis: ComplexMatrix,
}

impl CodeSubspace {
    pub fn new(basis: ComplexMatrix) -> Result<Self> {
        let (m, k) = basis.shape();
        if k == 0 || k > m {
            return Err(Error::InvalidParameter(format!(
                "code basis must be M×K with 1 ≤ K ≤ M, got {m}×{k}"
            )));
        }
        let dev = (basis.adjoint() * &basis - ComplexMatrix::identity(k, k))
            .iter()
            .fold(0.0f64, |acc, z| acc.max(z.norm()));
        if dev.is_nan() || dev > BASIS_TOL {
            return Err(Error::InvalidParameter(format!(
                "code basis columns are not orthonormal (deviation {dev:e})"
            )));
        }
        Ok(CodeSubspace { basis })
    }

    /// Span of the first `code_dim` computational basis vectors.
    pub fn standard(ambient_dim: usize, code_dim: usize) -> Result<Self> {
        CodeSubspace::new(ComplexMatrix::identity(ambient_dim, code_dim))
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn code_dim(&self) -> usize {
        self.basis.ncols()
    }

    /// `log2 K` qubits.
    pub fn size_bits(&self) -> f64 {
        (self.code_dim() as f64).log2()
    }

    /// `Π_C = P P†`.
    pub fn projector(&self) -> ComplexMatrix {
        &self.basis * self.basis.adjoint()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CodeFile {
            basis: matrix_to_rows(&self.basis),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CodeFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        CodeSubspace::new(matrix_from_rows(&file.basis)?)
    }
}

#[derive(Serialize, Deserialize)]
struct CodeFile {
    basis: Vec<Vec<[f64; 2]>>,
}

/// `π_C = Π_C / K`.
pub fn normalized_projector(code: &CodeSubspace) -> DensityOperator {
    let k = code.code_dim() as f64;
    DensityOperator::new(hermitian_part(&code.projector().unscale(k)))
        .expect("projector of an orthonormal basis is a density operator")
}

fn check_endomorphism(rho: &DensityOperator, ch: &KrausChannel) -> Result<()> {
    if !rho.is_normalized() {
        return Err(Error::InvalidDensity(format!("trace {} is not 1", rho.trace())));
    }
    if ch.input_dim() != ch.output_dim() || ch.input_dim() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "entanglement fidelity needs a {0}→{0} channel, got {1}→{2}",
            rho.dim(),
            ch.input_dim(),
            ch.output_dim()
        )));
    }
    Ok(())
}

/// `F_e(ρ, N) = Σ_k |tr ρ A_k|²`. Trace-decreasing channels are allowed.
pub fn entanglement_fidelity(rho: &DensityOperator, ch: &KrausChannel) -> Result<f64> {
    check_endomorphism(rho, ch)?;
    let f: f64 = ch.kraus().iter().map(|a| (rho.matrix() * a).trace().norm_sqr()).sum();
    Ok(f.clamp(0.0, 1.0))
}

/// `⟨ψ| (1_R ⊗ N)(ψ) |ψ⟩` for the minimal purification `ψ` of `ρ`.
pub fn entanglement_fidelity_purified(rho: &DensityOperator, ch: &KrausChannel) -> Result<f64> {
    check_endomorphism(rho, ch)?;
    let (psi, _) = purify(rho);
    let joint = joint_output(rho, ch)?;
    let f = (psi.adjoint() * joint * &psi)[(0, 0)].re;
    Ok(f.clamp(0.0, 1.0))
}

/// Average subspace fidelity `(K F_e + 1) / (K + 1)`.
pub fn average_fidelity_from_fe(code_dim: usize, fe: f64) -> f64 {
    let k = code_dim as f64;
    (k * fe + 1.0) / (k + 1.0)
}

fn compressed_kraus(code: &CodeSubspace, ch: &KrausChannel) -> Result<Vec<ComplexMatrix>> {
    if ch.input_dim() != code.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "code lives in dimension {}, channel input is {}",
            code.ambient_dim(),
            ch.input_dim()
        )));
    }
    Ok(ch.kraus().iter().map(|a| a * code.basis()).collect())
}

/// The operator `D` on `C ⊗ E`, index `l * N + i` for code index `l` and Kraus index `i`.
pub fn d_operator(code: &CodeSubspace, ch: &KrausChannel) -> Result<ComplexMatrix> {
    let ap = compressed_kraus(code, ch)?;
    Ok(d_from_compressed(&ap, code.code_dim()))
}

fn d_from_compressed(ap: &[ComplexMatrix], k: usize) -> ComplexMatrix {
    let n = ap.len();
    let kf = k as f64;
    let mut d = ComplexMatrix::zeros(k * n, k * n);
    for i in 0..n {
        for j in i..n {
            let g = ap[i].adjoint() * &ap[j];
            let shift = g.trace() / kf;
            for l in 0..k {
                for m in 0..k {
                    let mut v = g[(l, m)];
                    if l == m {
                        v -= shift;
                    }
                    v /= kf;
                    d[(l * n + i, m * n + j)] = v;
                    d[(m * n + j, l * n + i)] = v.conj();
                }
            }
        }
    }
    d
}

/// Transmission `tr N(π_C)` from the compressed Kraus operators.
fn transmission(ap: &[ComplexMatrix], k: usize) -> f64 {
    ap.iter().map(|b| b.norm_squared()).sum::<f64>() / k as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `tr N(π_C)`.
    pub p: f64,
    pub trace_norm_d: f64,
    pub frobenius_d_sq: f64,
    /// `p - ‖D‖₁`.
    pub bound_kraus: f64,
    /// `p - p‖ρ'_RE - ρ_R ⊗ ρ'_E‖₁`; absent when only the Kraus form was evaluated.
    pub bound_states: Option<f64>,
}

/// Kraus-form lower bound on the recovery-optimised entanglement fidelity of `code`.
pub fn fidelity_lower_bound_kraus(code: &CodeSubspace, ch: &KrausChannel) -> Result<BoundReport> {
    let ap = compressed_kraus(code, ch)?;
    let k = code.code_dim();
    let d = d_from_compressed(&ap, k);
    let spectrum = eigenvalues_hermitian(&d);
    let trace_norm_d: f64 = spectrum.iter().map(|l| l.abs()).sum();
    let p = transmission(&ap, k);
    Ok(BoundReport {
        p,
        trace_norm_d,
        frobenius_d_sq: d.norm_squared(),
        bound_kraus: p - trace_norm_d,
        bound_states: None,
    })
}

/// State-form bound, evaluated from the purified channel output.
pub fn states_form_bound(code: &CodeSubspace, ch: &KrausChannel) -> Result<f64> {
    let ap = compressed_kraus(code, ch)?;
    let k = code.code_dim();
    let p = transmission(&ap, k);
    if p < MIN_TRANSMISSION {
        return Err(Error::DegenerateTransmission(p));
    }
    let n = ch.len();
    let d_out = ch.output_dim();
    // ψ' on R ⊗ Q' ⊗ E: (1/√(pK)) Σ_l |l⟩ ⊗ V|c_l⟩, with V|c_l⟩ = Σ_k A_k|c_l⟩ ⊗ |k⟩
    let scale = 1.0 / (p * k as f64).sqrt();
    let mut psi = ComplexVector::zeros(k * d_out * n);
    for l in 0..k {
        for q in 0..d_out {
            for (i, b) in ap.iter().enumerate() {
                psi[(l * d_out + q) * n + i] = b[(q, l)] * scale;
            }
        }
    }
    let dims = [k, d_out, n];
    let rho_re = reduced_state(&psi, &dims, &[0, 2])?;
    let rho_e = reduced_state(&psi, &dims, &[2])?;
    let rho_r = ComplexMatrix::identity(k, k).unscale(k as f64);
    let diff = rho_re - rho_r.kronecker(&rho_e);
    let dist: f64 = eigenvalues_hermitian(&diff).iter().map(|l| l.abs()).sum();
    Ok(p - p * dist)
}

/// Both forms of the bound in one report.
pub fn fidelity_lower_bound_states(code: &CodeSubspace, ch: &KrausChannel) -> Result<BoundReport> {
    let mut report = fidelity_lower_bound_kraus(code, ch)?;
    report.bound_states = Some(states_form_bound(code, ch)?);
    Ok(report)
}

/// `‖D‖²_F` from the closed expression `Σ_ij [tr(π W_ij† π W_ij) - |tr π W_ij|² / K]`
/// with `W_ij = A_i†A_j` and `π = π_C`; used as an oracle for [`d_operator`].
pub fn d_frobenius_sq_direct(code: &CodeSubspace, ch: &KrausChannel) -> Result<f64> {
    let pi = normalized_projector(code);
    let pi = pi.matrix();
    let k = code.code_dim() as f64;
    let mut total = 0.0;
    for a in ch.kraus() {
        for b in ch.kraus() {
            let w = a.adjoint() * b;
            let tw = (pi * &w).trace();
            let quad = (pi * w.adjoint() * pi * &w).trace().re;
            total += quad - tw.norm_sqr() / k;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::C64;
    use crate::matrix::{haar_isometry, random_density};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_code<R: Rng>(m: usize, k: usize, rng: &mut R) -> CodeSubspace {
        CodeSubspace::new(haar_isometry(m, k, rng)).unwrap()
    }

    #[test]
    fn code_validation() {
        assert!(CodeSubspace::new(ComplexMatrix::identity(2, 3)).is_err());
        assert!(CodeSubspace::new(ComplexMatrix::identity(2, 2).scale(2.0)).is_err());
        let c = CodeSubspace::standard(4, 2).unwrap();
        assert_eq!((c.ambient_dim(), c.code_dim()), (4, 2));
        assert_eq!(c.size_bits(), 1.0);
        let back = CodeSubspace::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn normalized_projector_examples() {
        let full = normalized_projector(&CodeSubspace::standard(3, 3).unwrap());
        assert!((full.matrix() - DensityOperator::maximally_mixed(3).matrix()).norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 1..=4 {
            let pi = normalized_projector(&random_code(5, k, &mut rng));
            let purity = (pi.matrix() * pi.matrix()).trace().re;
            assert!((purity - 1.0 / k as f64).abs() < 1e-12);
            assert!((pi.trace() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn entanglement_fidelity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density(3, 2, &mut rng);
        let id = KrausChannel::identity(3).unwrap();
        assert!((entanglement_fidelity(&rho, &id).unwrap() - 1.0).abs() < 1e-12);

        let pi = DensityOperator::maximally_mixed(2);
        let pf = KrausChannel::phase_flip(0.3).unwrap();
        assert!((entanglement_fidelity(&pi, &pf).unwrap() - 0.7).abs() < 1e-12);
        let reduced = pf.reduce(&[0]).unwrap();
        let fr = entanglement_fidelity(&pi, &reduced).unwrap();
        assert!((fr - 0.7).abs() < 1e-12);
        assert!(fr <= entanglement_fidelity(&pi, &pf).unwrap() + 1e-15);

        assert!(entanglement_fidelity(&pi, &KrausChannel::identity(3).unwrap()).is_err());
    }

    #[test]
    fn entanglement_fidelity_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in 1..=5 {
            for n in 1..=4 {
                let ch = KrausChannel::haar_random(dim, dim, n, &mut rng).unwrap();
                let rho = random_density(dim, 1 + n % dim, &mut rng);
                let a = entanglement_fidelity(&rho, &ch).unwrap();
                let b = entanglement_fidelity_purified(&rho, &ch).unwrap();
                assert!((a - b).abs() < 1e-9);
            }
        }
        let half = KrausChannel::new(vec![ComplexMatrix::identity(2, 2).scale(0.5)]).unwrap();
        let pi = DensityOperator::maximally_mixed(2);
        assert!((entanglement_fidelity(&pi, &half).unwrap() - 0.25).abs() < 1e-15);
        assert!((entanglement_fidelity_purified(&pi, &half).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn average_fidelity_examples() {
        assert_eq!(average_fidelity_from_fe(3, 1.0), 1.0);
        assert!((average_fidelity_from_fe(1, 0.4) - 0.7).abs() < 1e-15);
        assert!((average_fidelity_from_fe(2, 0.5) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn identity_gives_zero_d() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for m in 1..=5 {
            for k in 1..=m {
                let code = random_code(m, k, &mut rng);
                let id = KrausChannel::identity(m).unwrap();
                let d = d_operator(&code, &id).unwrap();
                assert!(d.norm() <= 1e-12);
                let r = fidelity_lower_bound_states(&code, &id).unwrap();
                assert!((r.bound_kraus - 1.0).abs() < 1e-12);
                assert!((r.bound_states.unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn d_is_hermitian_with_traceless_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ch = KrausChannel::haar_random(4, 3, 3, &mut rng).unwrap();
        let code = random_code(4, 2, &mut rng);
        let d = d_operator(&code, &ch).unwrap();
        assert!((&d - d.adjoint()).norm() < 1e-14);
        let n = ch.len();
        for i in 0..n {
            let block_trace: C64 = (0..2).map(|l| d[(l * n + i, l * n + i)]).sum();
            assert!(block_trace.norm() < 1e-14);
        }
    }

    #[test]
    fn d_frobenius_matches_direct_expression() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pf = KrausChannel::phase_flip(0.25).unwrap();
        let full = CodeSubspace::standard(2, 2).unwrap();
        let r = fidelity_lower_bound_kraus(&full, &pf).unwrap();
        assert!((r.frobenius_d_sq - d_frobenius_sq_direct(&full, &pf).unwrap()).abs() < 1e-12);
        for _ in 0..10 {
            let ch = KrausChannel::haar_random(4, 2, 3, &mut rng).unwrap();
            let code = random_code(4, 3, &mut rng);
            let r = fidelity_lower_bound_kraus(&code, &ch).unwrap();
            assert!((r.frobenius_d_sq - d_frobenius_sq_direct(&code, &ch).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn bound_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let m = rng.random_range(1..=6);
            let k = rng.random_range(1..=m);
            let out = rng.random_range(1..=6);
            let n = rng.random_range(1..=4);
            if out * n < m {
                continue;
            }
            let ch = KrausChannel::haar_random(m, out, n, &mut rng).unwrap();
            let code = random_code(m, k, &mut rng);
            let r = fidelity_lower_bound_states(&code, &ch).unwrap();
            assert!((r.bound_kraus - r.bound_states.unwrap()).abs() <= 1e-9);
            assert!(r.bound_kraus <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn trace_decreasing_cases() {
        let half = KrausChannel::new(vec![ComplexMatrix::identity(2, 2).scale(0.5f64.sqrt())]).unwrap();
        let code = CodeSubspace::standard(2, 1).unwrap();
        let r = fidelity_lower_bound_states(&code, &half).unwrap();
        assert!((r.p - 0.5).abs() < 1e-15);
        assert!(r.trace_norm_d < 1e-15);
        assert!((r.bound_kraus - 0.5).abs() < 1e-15);
        assert!((r.bound_states.unwrap() - 0.5).abs() < 1e-12);

        let dead = KrausChannel::new(vec![ComplexMatrix::zeros(2, 2)]).unwrap();
        assert!(matches!(
            fidelity_lower_bound_states(&code, &dead),
            Err(Error::DegenerateTransmission(_))
        ));
    }

    #[test]
    fn phase_flip_fixed_code_state() {
        let pf = KrausChannel::phase_flip(0.25).unwrap();
        let code = CodeSubspace::standard(2, 1).unwrap();
        let r = fidelity_lower_bound_states(&code, &pf).unwrap();
        assert!((r.bound_kraus - 1.0).abs() < 1e-12);
        assert!((r.bound_states.unwrap() - 1.0).abs() < 1e-12);
    }
}
