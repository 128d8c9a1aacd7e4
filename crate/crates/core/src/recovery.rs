//! Explicit recovery maps used as test witnesses for the fidelity bound.
//!
//! Nothing here is needed to compute the bound itself. The bound asserts that
//! some recovery reaches it; these searches produce concrete recoveries whose
//! fidelity can be compared against it.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::channels::KrausChannel;
use crate::code_fidelity::{entanglement_fidelity, normalized_projector, CodeSubspace};
use crate::error::{Error, Result};
use crate::matrix::{eigh_unchecked, haar_isometry, ComplexMatrix, C64, PSD_TOL};

/// Transpose (Petz) recovery `R_k = Π_C A_k† N(Π_C)^{-1/2}`, completed to a
/// trace-preserving map on the kernel of `N(Π_C)`.
pub fn transpose_recovery(code: &CodeSubspace, ch: &KrausChannel) -> Result<KrausChannel> {
    if ch.input_dim() != code.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "code lives in dimension {}, channel input is {}",
            code.ambient_dim(),
            ch.input_dim()
        )));
    }
    let proj = code.projector();
    let image = ch.apply_matrix(&proj)?;
    let e = eigh_unchecked(&image);
    let top = e.values.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = PSD_TOL * top.max(1.0);
    let inv_sqrt = e.map(|l| if l > cutoff { 1.0 / l.sqrt() } else { 0.0 });

    let mut kraus: Vec<ComplexMatrix> = ch.kraus().iter().map(|a| &proj * a.adjoint() * &inv_sqrt).collect();
    let anchor = code.basis().column(0).into_owned();
    for (idx, &l) in e.values.iter().enumerate() {
        if l <= cutoff {
            let v = e.vectors.column(idx);
            kraus.push(&anchor * v.adjoint());
        }
    }
    Ok(KrausChannel::new(kraus)?.with_name("transpose_recovery"))
}

/// Best entanglement fidelity found and the recovery that achieved it.
#[derive(Debug, Clone)]
pub struct RecoverySearch {
    pub fidelity: f64,
    pub transpose_fidelity: f64,
    pub recovery: KrausChannel,
}

const ASCENT_MAX_ITERS: usize = 400;
const ASCENT_TOL: f64 = 1e-12;

/// Searches recoveries `Q' → Q` for a high `F_e(π_C, R ∘ N)`.
///
/// Starts from the transpose recovery and from `random_starts` Haar-random
/// Stinespring isometries (seeded), each improved by monotone polar ascent.
/// The objective is convex in the recovery isometry, so each step maximises
/// its linearisation and never decreases the fidelity.
pub fn best_recovery_fidelity(
    code: &CodeSubspace,
    ch: &KrausChannel,
    random_starts: usize,
    seed: u64,
) -> Result<RecoverySearch> {
    let transpose = transpose_recovery(code, ch)?;
    let pi = normalized_projector(code);
    let transpose_fidelity = entanglement_fidelity(&pi, &ch.then(&transpose)?)?;

    let m = ch.input_dim();
    let q_out = ch.output_dim();
    let env = (m * q_out).max(transpose.len());
    let xs: Vec<ComplexMatrix> = ch.kraus().iter().map(|a| a * pi.matrix()).collect();

    let mut starts = vec![isometry_from_recovery(&transpose, env)];
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..random_starts {
        starts.push(haar_isometry(m * env, q_out, &mut rng));
    }

    let mut best: Option<(f64, ComplexMatrix)> = None;
    for w0 in starts {
        let (f, w) = ascend(w0, &xs, m, env);
        if best.as_ref().is_none_or(|(bf, _)| f > *bf) {
            best = Some((f, w));
        }
    }
    let (fidelity, w) = best.expect("at least the transpose start");
    let recovery = KrausChannel::from_isometry(&w, env, false)?.with_name("searched_recovery");
    Ok(RecoverySearch {
        fidelity: fidelity.max(transpose_fidelity),
        transpose_fidelity,
        recovery,
    })
}

/// Stacks Kraus operators `R_l : Q' → Q` into `W[(q * L + l), q'] = R_l[q, q']`,
/// padding with zero operators up to `env`.
fn isometry_from_recovery(r: &KrausChannel, env: usize) -> ComplexMatrix {
    let (m, q_out) = (r.output_dim(), r.input_dim());
    let mut w = ComplexMatrix::zeros(m * env, q_out);
    for (l, op) in r.kraus().iter().enumerate() {
        for q in 0..m {
            for qp in 0..q_out {
                w[(q * env + l, qp)] = op[(q, qp)];
            }
        }
    }
    w
}

/// `c_kl = tr(R_l X_k)` with `X_k = A_k π_C`.
fn overlaps(w: &ComplexMatrix, xs: &[ComplexMatrix], m: usize, env: usize) -> Vec<C64> {
    let q_out = w.ncols();
    let mut c = vec![C64::new(0.0, 0.0); xs.len() * env];
    for (k, x) in xs.iter().enumerate() {
        for l in 0..env {
            let mut s = C64::new(0.0, 0.0);
            for q in 0..m {
                for qp in 0..q_out {
                    s += w[(q * env + l, qp)] * x[(qp, q)];
                }
            }
            c[k * env + l] = s;
        }
    }
    c
}

fn ascend(mut w: ComplexMatrix, xs: &[ComplexMatrix], m: usize, env: usize) -> (f64, ComplexMatrix) {
    let q_out = w.ncols();
    let mut c = overlaps(&w, xs, m, env);
    let mut f: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    for _ in 0..ASCENT_MAX_ITERS {
        let mut g = ComplexMatrix::zeros(m * env, q_out);
        for (k, x) in xs.iter().enumerate() {
            for l in 0..env {
                let ckl = c[k * env + l];
                if ckl == C64::new(0.0, 0.0) {
                    continue;
                }
                for q in 0..m {
                    for qp in 0..q_out {
                        g[(q * env + l, qp)] += ckl * x[(qp, q)].conj();
                    }
                }
            }
        }
        let Some(next) = polar_factor(&g) else { break };
        let c_next = overlaps(&next, xs, m, env);
        let f_next: f64 = c_next.iter().map(|z| z.norm_sqr()).sum();
        if f_next <= f + ASCENT_TOL {
            if f_next > f {
                w = next;
                f = f_next;
            }
            break;
        }
        w = next;
        c = c_next;
        f = f_next;
    }
    (f, w)
}

/// Isometric factor `U V†` of the thin SVD `G = U Σ V†`.
fn polar_factor(g: &ComplexMatrix) -> Option<ComplexMatrix> {
    let svd = g.clone().svd(true, true);
    let (u, v_t) = (svd.u?, svd.v_t?);
    if svd.singular_values.iter().all(|s| *s <= 0.0) {
        return None;
    }
    Some(u * v_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_fidelity::fidelity_lower_bound_kraus;
    use crate::matrix::haar_isometry;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn transpose_recovery_is_trace_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = KrausChannel::haar_random(3, 3, 2, &mut rng).unwrap();
        let code = CodeSubspace::new(haar_isometry(3, 2, &mut rng)).unwrap();
        let r = transpose_recovery(&code, &ch).unwrap();
        assert!(r.is_trace_preserving());
        assert_eq!((r.input_dim(), r.output_dim()), (3, 3));
    }

    #[test]
    fn identity_channel_is_perfectly_recovered() {
        let code = CodeSubspace::standard(3, 2).unwrap();
        let id = KrausChannel::identity(3).unwrap();
        let s = best_recovery_fidelity(&code, &id, 0, 0).unwrap();
        assert!((s.transpose_fidelity - 1.0).abs() < 1e-12);
        assert!((s.fidelity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn witnesses_reach_the_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for trial in 0..15 {
            let m = 2 + trial % 3;
            let ch = KrausChannel::haar_random(m, m, 1 + trial % 3, &mut rng).unwrap();
            let code = CodeSubspace::new(haar_isometry(m, 1 + trial % m, &mut rng)).unwrap();
            let bound = fidelity_lower_bound_kraus(&code, &ch).unwrap().bound_kraus;
            let s = best_recovery_fidelity(&code, &ch, 2, trial as u64).unwrap();
            assert!(s.fidelity >= bound - 1e-6, "trial {trial}: {} < {bound}", s.fidelity);
            assert!(s.recovery.is_trace_preserving());
        }
    }
}
