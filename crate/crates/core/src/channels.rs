//! Quantum channels as Kraus families.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    eigenvalues_hermitian, eigh_unchecked, entropy_of_spectrum, haar_isometry, haar_unitary, hermitian_part, is_finite,
    purify, random_density, sandwich_sum, trace_norm, ComplexMatrix, ComplexVector, DensityOperator, Limits, C64,
};

/// Tolerance on `Σ A†A - I` for trace preservation and completeness.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Gram eigenvalues above this fraction of the largest one count toward `|N|`.
pub const GRAM_RANK_TOL: f64 = 1e-10;
/// Trace-distance threshold for unitality.
pub const UNITAL_TOL: f64 = 1e-9;
/// Relative spread of the Kraus weights tolerated by the uniformity test.
pub const UNIFORM_TOL: f64 = 1e-9;

/// A completely positive, trace-non-increasing map `ρ ↦ Σ A_k ρ A_k†`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    name: Option<String>,
    input_dim: usize,
    output_dim: usize,
    kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Validates shapes, finiteness and `Σ A_k†A_k ≤ 1`.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty Kraus family".into()))?;
        let (output_dim, input_dim) = first.shape();
        if input_dim == 0 || output_dim == 0 {
            return Err(Error::InvalidParameter("zero-dimensional Kraus operator".into()));
        }
        for (k, a) in kraus.iter().enumerate() {
            if a.shape() != (output_dim, input_dim) {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {k} is {}x{}, expected {output_dim}x{input_dim}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            if !is_finite(a) {
                return Err(Error::NonFinite);
            }
        }
        let channel = KrausChannel {
            name: None,
            input_dim,
            output_dim,
            kraus,
        };
        let defect = channel.completeness_defect();
        if defect > COMPLETENESS_TOL {
            return Err(Error::NotTraceNonIncreasing(defect));
        }
        Ok(channel)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn len(&self) -> usize {
        self.kraus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kraus.is_empty()
    }

    /// `Σ A_k† A_k`.
    pub fn completeness(&self) -> ComplexMatrix {
        let mut sum = ComplexMatrix::zeros(self.input_dim, self.input_dim);
        for a in &self.kraus {
            sum += a.adjoint() * a;
        }
        sum
    }

    fn completeness_spectrum(&self) -> Vec<f64> {
        let mut m = self.completeness();
        for i in 0..self.input_dim {
            m[(i, i)] -= C64::new(1.0, 0.0);
        }
        eigenvalues_hermitian(&m)
    }

    /// Largest eigenvalue of `Σ A†A - 1`; positive values mean trace increase.
    pub fn completeness_defect(&self) -> f64 {
        *self.completeness_spectrum().last().unwrap()
    }

    /// Largest `|eigenvalue|` of `Σ A†A - 1`.
    pub fn trace_deviation(&self) -> f64 {
        self.completeness_spectrum().iter().fold(0.0, |m, l| m.max(l.abs()))
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_deviation() <= COMPLETENESS_TOL
    }

    pub(crate) fn require_trace_preserving(&self) -> Result<()> {
        let dev = self.trace_deviation();
        if dev > COMPLETENESS_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(())
    }

    fn check_input(&self, dim: usize) -> Result<()> {
        if dim != self.input_dim {
            return Err(Error::DimensionMismatch(format!(
                "channel input dimension {} applied to a {dim}-dimensional operator",
                self.input_dim
            )));
        }
        Ok(())
    }

    /// `Σ A_k M A_k†` for an arbitrary square input.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch("channel input must be square".into()));
        }
        self.check_input(m.nrows())?;
        Ok(sandwich_sum(&self.kraus, m))
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let out = self.apply_matrix(rho.matrix())?;
        DensityOperator::new(hermitian_part(&out))
    }

    /// `tr N(ρ)`.
    pub fn transmission_probability(&self, rho: &DensityOperator) -> Result<f64> {
        self.check_input(rho.dim())?;
        let c = self.completeness();
        Ok((c * rho.matrix()).trace().re)
    }

    /// `N(π)` for the maximally mixed input.
    pub fn output_on_uniform(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.output_dim, self.output_dim);
        for a in &self.kraus {
            out += a * a.adjoint();
        }
        out.unscale(self.input_dim as f64)
    }

    /// Stinespring operator `V : Q → Q' ⊗ E`, row index `q' * N + k`.
    ///
    /// `V†V = Σ A†A`, so `V` is an isometry exactly when the channel is
    /// trace preserving.
    pub fn stinespring_isometry(&self) -> ComplexMatrix {
        let n = self.kraus.len();
        ComplexMatrix::from_fn(self.output_dim * n, self.input_dim, |row, col| {
            self.kraus[row % n][(row / n, col)]
        })
    }

    /// Kraus operators `A_k = ⟨k|V` of an operator `V : Q → Q' ⊗ E`.
    ///
    /// With `require_isometry`, `V†V = 1` must hold within tolerance.
    pub fn from_isometry(v: &ComplexMatrix, env_dim: usize, require_isometry: bool) -> Result<Self> {
        if env_dim == 0 || !v.nrows().is_multiple_of(env_dim) {
            return Err(Error::DimensionMismatch(format!(
                "{} rows are not a multiple of the environment dimension {env_dim}",
                v.nrows()
            )));
        }
        let output_dim = v.nrows() / env_dim;
        let kraus = (0..env_dim)
            .map(|k| ComplexMatrix::from_fn(output_dim, v.ncols(), |q, col| v[(q * env_dim + k, col)]))
            .collect();
        let ch = KrausChannel::new(kraus)?;
        if require_isometry {
            ch.require_trace_preserving()?;
        }
        Ok(ch)
    }

    /// `H_ij = tr A_i† A_j`.
    pub fn gram_matrix(&self) -> ComplexMatrix {
        let n = self.kraus.len();
        ComplexMatrix::from_fn(n, n, |i, j| self.kraus[i].dotc(&self.kraus[j]))
    }

    /// Equivalent Kraus family with `tr A_i†A_j = 0` for `i ≠ j`.
    ///
    /// Operators are recombined with the eigenvectors of the Gram matrix,
    /// numerically vanishing ones are dropped, and the rest are ordered by
    /// decreasing weight `tr A†A`. The result is a minimal representation.
    pub fn diagonalize(&self) -> Self {
        let e = eigh_unchecked(&self.gram_matrix());
        let top = e.values.last().copied().unwrap_or(0.0);
        let mut kraus = Vec::new();
        for m in (0..e.values.len()).rev() {
            if !(top > 0.0 && e.values[m] > GRAM_RANK_TOL * top) {
                continue;
            }
            let mut a = ComplexMatrix::zeros(self.output_dim, self.input_dim);
            for (j, b) in self.kraus.iter().enumerate() {
                a += b * e.vectors[(j, m)];
            }
            kraus.push(a);
        }
        if kraus.is_empty() {
            kraus.push(ComplexMatrix::zeros(self.output_dim, self.input_dim));
        }
        KrausChannel {
            name: self.name.clone(),
            input_dim: self.input_dim,
            output_dim: self.output_dim,
            kraus,
        }
    }

    /// The length `|N|`: rank of the Gram matrix.
    pub fn minimal_length(&self) -> usize {
        let values = eigenvalues_hermitian(&self.gram_matrix());
        let top = values.last().copied().unwrap_or(0.0);
        if top <= 0.0 {
            return 0;
        }
        values.iter().filter(|&&l| l > GRAM_RANK_TOL * top).count()
    }

    /// `N^{⊗n}` with all `|N|^n` products `A_{j1} ⊗ … ⊗ A_{jn}` (first index slowest).
    pub fn tensor_power(&self, n: usize, limits: &Limits) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("tensor power needs n >= 1".into()));
        }
        let pow = |base: usize| base.checked_pow(n as u32).unwrap_or(usize::MAX);
        let (rows, cols, count) = (pow(self.output_dim), pow(self.input_dim), pow(self.kraus.len()));
        limits.check_shape("tensor power Kraus family", rows, cols, count)?;
        let mut ops = self.kraus.clone();
        for _ in 1..n {
            ops = ops
                .iter()
                .flat_map(|a| self.kraus.iter().map(move |b| a.kronecker(b)))
                .collect();
        }
        Ok(KrausChannel {
            name: self.name.as_ref().map(|s| format!("{s}^{n}")),
            input_dim: cols,
            output_dim: rows,
            kraus: ops,
        })
    }

    /// Sub-channel keeping the Kraus operators at `indices` (0-based).
    pub fn reduce(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidParameter("reduction to an empty Kraus subset".into()));
        }
        let mut seen = vec![false; self.kraus.len()];
        for &i in indices {
            if i >= self.kraus.len() || seen[i] {
                return Err(Error::InvalidParameter(format!("bad or repeated Kraus index {i}")));
            }
            seen[i] = true;
        }
        Ok(KrausChannel {
            name: self.name.clone(),
            input_dim: self.input_dim,
            output_dim: self.output_dim,
            kraus: indices.iter().map(|&i| self.kraus[i].clone()).collect(),
        })
    }

    /// `after ∘ self`.
    pub fn then(&self, after: &KrausChannel) -> Result<Self> {
        if after.input_dim != self.output_dim {
            return Err(Error::DimensionMismatch(format!(
                "composing a channel into dimension {} with one from dimension {}",
                self.output_dim, after.input_dim
            )));
        }
        let kraus = after
            .kraus
            .iter()
            .flat_map(|b| self.kraus.iter().map(move |a| b * a))
            .collect();
        Ok(KrausChannel {
            name: None,
            input_dim: self.input_dim,
            output_dim: after.output_dim,
            kraus,
        })
    }

    /// Extensional comparison: both channels act alike (max-entry distance
    /// `≤ tol`) on a fixed battery of 20 pseudo-random states.
    pub fn acts_like(&self, other: &KrausChannel, tol: f64) -> bool {
        if self.input_dim != other.input_dim || self.output_dim != other.output_dim {
            return false;
        }
        let mut rng = ChaCha20Rng::seed_from_u64(0x5eed_c4a2);
        (0..20).all(|k| {
            let rho = random_density(self.input_dim, 1 + k % self.input_dim, &mut rng);
            let a = sandwich_sum(&self.kraus, rho.matrix());
            let b = sandwich_sum(&other.kraus, rho.matrix());
            (a - b).iter().all(|z| z.norm() <= tol)
        })
    }

    // ---- constructors ----

    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok(KrausChannel::new(vec![ComplexMatrix::identity(dim, dim)])?.with_name("identity"))
    }

    /// Qubit phase flip `ρ ↦ (1-p) ρ + p ZρZ`.
    pub fn phase_flip(p: f64) -> Result<Self> {
        check_probability(p)?;
        let z = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]));
        let kraus = vec![ComplexMatrix::identity(2, 2).scale((1.0 - p).sqrt()), z.scale(p.sqrt())];
        Ok(KrausChannel::new(kraus)?.with_name(format!("phase_flip({p})")))
    }

    /// `ρ ↦ (1-p) ρ + p tr(ρ) 1/d` via the Weyl operators `X^a Z^b`.
    pub fn depolarizing(p: f64, dim: usize) -> Result<Self> {
        check_probability(p)?;
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let d = dim as f64;
        let omega = |k: usize| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d);
        let mut kraus = Vec::with_capacity(dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                let weight = if a == 0 && b == 0 {
                    (1.0 - p + p / (d * d)).sqrt()
                } else {
                    p.sqrt() / d
                };
                // X^a Z^b |j⟩ = ω^{bj} |j + a⟩
                let op = ComplexMatrix::from_fn(dim, dim, |row, col| {
                    if row == (col + a) % dim {
                        omega((b * col) % dim) * weight
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                kraus.push(op);
            }
        }
        Ok(KrausChannel::new(kraus)?.with_name(format!("depolarizing({p})")))
    }

    /// Qubit amplitude damping with decay probability `gamma` (not unital for `gamma > 0`).
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        check_probability(gamma)?;
        let c = |x: f64| C64::new(x, 0.0);
        let a0 = ComplexMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c((1.0 - gamma).sqrt())]);
        let a1 = ComplexMatrix::from_row_slice(2, 2, &[c(0.0), c(gamma.sqrt()), c(0.0), c(0.0)]);
        Ok(KrausChannel::new(vec![a0, a1])?.with_name(format!("amplitude_damping({gamma})")))
    }

    /// `ρ ↦ Σ p_i U_i ρ U_i†`.
    pub fn random_unitary(unitaries: &[ComplexMatrix], probabilities: &[f64]) -> Result<Self> {
        if unitaries.len() != probabilities.len() || unitaries.is_empty() {
            return Err(Error::InvalidParameter(
                "need one probability per unitary and at least one unitary".into(),
            ));
        }
        let total: f64 = probabilities.iter().sum();
        if probabilities.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "probabilities {probabilities:?} are not normalized"
            )));
        }
        for (k, u) in unitaries.iter().enumerate() {
            let n = u.nrows();
            if !u.is_square() || (u.adjoint() * u - ComplexMatrix::identity(n, n)).norm() > 1e-10 {
                return Err(Error::InvalidParameter(format!("operator {k} is not unitary")));
            }
        }
        let kraus = unitaries
            .iter()
            .zip(probabilities)
            .map(|(u, &p)| u.scale(p.sqrt()))
            .collect();
        Ok(KrausChannel::new(kraus)?.with_name("random_unitary"))
    }

    /// Channel from a Haar-random Stinespring isometry `Q → Q' ⊗ E`.
    pub fn haar_random<R: Rng + ?Sized>(
        input_dim: usize,
        output_dim: usize,
        kraus_count: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 || kraus_count == 0 {
            return Err(Error::InvalidParameter("dimensions must be positive".into()));
        }
        if output_dim * kraus_count < input_dim {
            return Err(Error::InvalidParameter(format!(
                "no isometry from dimension {input_dim} into {output_dim}x{kraus_count}"
            )));
        }
        let v = haar_isometry(output_dim * kraus_count, input_dim, rng);
        Ok(KrausChannel::from_isometry(&v, kraus_count, true)?
            .with_name(format!("haar_random({input_dim},{output_dim},{kraus_count})")))
    }

    /// Random unitary channel with `count` Haar unitaries applied with equal probability.
    pub fn haar_random_unitary<R: Rng + ?Sized>(dim: usize, count: usize, rng: &mut R) -> Result<Self> {
        if dim == 0 || count == 0 {
            return Err(Error::InvalidParameter("dimensions must be positive".into()));
        }
        let unitaries: Vec<_> = (0..count).map(|_| haar_unitary(dim, rng)).collect();
        let probs = vec![1.0 / count as f64; count];
        Ok(KrausChannel::random_unitary(&unitaries, &probs)?.with_name(format!("haar_random_unitary({dim},{count})")))
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// Entropy exchange `S_e(ρ, N) = S(W)`, `W_ij = tr(A_i ρ A_j†)`.
pub fn entropy_exchange(rho: &DensityOperator, ch: &KrausChannel) -> Result<f64> {
    let w = exchange_matrix(rho, ch)?;
    Ok(entropy_of_spectrum(&eigenvalues_hermitian(&w)))
}

fn require_normalized(rho: &DensityOperator) -> Result<()> {
    if !rho.is_normalized() {
        return Err(Error::InvalidDensity(format!("trace {} is not 1", rho.trace())));
    }
    Ok(())
}

/// `W_ij = tr(A_i ρ A_j†)`.
pub fn exchange_matrix(rho: &DensityOperator, ch: &KrausChannel) -> Result<ComplexMatrix> {
    require_normalized(rho)?;
    ch.require_trace_preserving()?;
    ch.check_input(rho.dim())?;
    let images: Vec<ComplexMatrix> = ch.kraus().iter().map(|a| a * rho.matrix()).collect();
    let n = ch.len();
    Ok(hermitian_part(&ComplexMatrix::from_fn(n, n, |i, j| {
        // tr(A_i ρ A_j†) = Σ (A_i ρ)_{ab} conj(A_j)_{ab}
        ch.kraus()[j].dotc(&images[i])
    })))
}

/// Entropy exchange as `S((1_R ⊗ N)(ψ_RQ))` for the minimal purification of `ρ`.
pub fn entropy_exchange_purified(rho: &DensityOperator, ch: &KrausChannel) -> Result<f64> {
    require_normalized(rho)?;
    ch.require_trace_preserving()?;
    let joint = joint_output(rho, ch)?;
    Ok(entropy_of_spectrum(&eigenvalues_hermitian(&joint)))
}

/// `(1_R ⊗ N)(ψ_RQ)` on `R ⊗ Q'`, with the purification from [`purify`].
pub fn joint_output(rho: &DensityOperator, ch: &KrausChannel) -> Result<ComplexMatrix> {
    ch.check_input(rho.dim())?;
    let (psi, rank) = purify(rho);
    let (d_in, d_out) = (ch.input_dim(), ch.output_dim());
    let mut joint = ComplexMatrix::zeros(rank * d_out, rank * d_out);
    for a in ch.kraus() {
        let mut phi = ComplexVector::zeros(rank * d_out);
        for r in 0..rank {
            let block = psi.rows(r * d_in, d_in);
            let image = a * block;
            phi.rows_mut(r * d_out, d_out).copy_from(&image);
        }
        joint += &phi * phi.adjoint();
    }
    Ok(joint)
}

/// `I(ρ, N) = S(N(ρ)) - S_e(ρ, N)` in bits.
pub fn coherent_information(rho: &DensityOperator, ch: &KrausChannel) -> Result<f64> {
    let se = entropy_exchange(rho, ch)?;
    let out = ch.apply_matrix(rho.matrix())?;
    Ok(entropy_of_spectrum(&eigenvalues_hermitian(&out)) - se)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelInfoReport {
    pub name: Option<String>,
    pub input_dim: usize,
    pub output_dim: usize,
    pub kraus_count: usize,
    pub is_trace_preserving: bool,
    pub is_unital: bool,
    pub is_uniform: bool,
    /// `|N|` after minimization.
    pub length: usize,
    /// `S(N(π))`; only for trace-preserving channels.
    pub output_entropy: Option<f64>,
    /// `S_e(π, N)`; only for trace-preserving channels.
    pub entropy_exchange: Option<f64>,
    /// `I(π, N)`; only for trace-preserving channels.
    pub coherent_information: Option<f64>,
}

/// Structural and information-theoretic summary on the maximally mixed input.
pub fn classify(ch: &KrausChannel) -> Result<ChannelInfoReport> {
    let out = ch.output_on_uniform();
    let target = ComplexMatrix::identity(ch.output_dim, ch.output_dim).unscale(ch.output_dim as f64);
    let is_unital = trace_norm(&(&out - target)) <= UNITAL_TOL;

    let diag = ch.diagonalize();
    let weights: Vec<f64> = diag.kraus().iter().map(|a| a.norm_squared()).collect();
    let max_w = weights.iter().cloned().fold(0.0, f64::max);
    let min_w = weights.iter().cloned().fold(f64::INFINITY, f64::min);
    let is_uniform = max_w > 0.0 && (max_w - min_w) / max_w <= UNIFORM_TOL;

    let is_trace_preserving = ch.is_trace_preserving();
    let (output_entropy, entropy_exchange_value, coherent) = if is_trace_preserving {
        let pi = DensityOperator::maximally_mixed(ch.input_dim);
        let so = entropy_of_spectrum(&eigenvalues_hermitian(&out));
        let se = entropy_exchange(&pi, ch)?;
        (Some(so), Some(se), Some(so - se))
    } else {
        (None, None, None)
    };
    Ok(ChannelInfoReport {
        name: ch.name.clone(),
        input_dim: ch.input_dim,
        output_dim: ch.output_dim,
        kraus_count: ch.len(),
        is_trace_preserving,
        is_unital,
        is_uniform,
        length: diag.len(),
        output_entropy,
        entropy_exchange: entropy_exchange_value,
        coherent_information: coherent,
    })
}

/// Named channel constructors, parsed from `name:param,param,...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Builtin {
    Identity {
        dim: usize,
    },
    PhaseFlip {
        p: f64,
    },
    Depolarizing {
        p: f64,
        dim: usize,
    },
    AmplitudeDamping {
        gamma: f64,
    },
    HaarRandom {
        input_dim: usize,
        output_dim: usize,
        kraus_count: usize,
        seed: u64,
    },
    HaarRandomUnitary {
        dim: usize,
        count: usize,
        seed: u64,
    },
}

impl Builtin {
    pub fn build(&self) -> Result<KrausChannel> {
        match *self {
            Builtin::Identity { dim } => KrausChannel::identity(dim),
            Builtin::PhaseFlip { p } => KrausChannel::phase_flip(p),
            Builtin::Depolarizing { p, dim } => KrausChannel::depolarizing(p, dim),
            Builtin::AmplitudeDamping { gamma } => KrausChannel::amplitude_damping(gamma),
            Builtin::HaarRandom {
                input_dim,
                output_dim,
                kraus_count,
                seed,
            } => KrausChannel::haar_random(
                input_dim,
                output_dim,
                kraus_count,
                &mut ChaCha20Rng::seed_from_u64(seed),
            ),
            Builtin::HaarRandomUnitary { dim, count, seed } => {
                KrausChannel::haar_random_unitary(dim, count, &mut ChaCha20Rng::seed_from_u64(seed))
            }
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    /// `identity[:d]`, `phase_flip:p`, `depolarizing:p[,d]`, `amplitude_damping:g`,
    /// `haar_random:q,q',n[,seed]`, `haar_random_unitary:d,count[,seed]`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let params: Vec<&str> = if rest.is_empty() {
            Vec::new()
        } else {
            rest.split(',').collect()
        };
        let bad = |what: &str| Error::Parse(format!("builtin channel `{s}`: {what}"));
        let float = |i: usize| -> Result<f64> {
            params
                .get(i)
                .ok_or_else(|| bad("missing parameter"))?
                .trim()
                .parse::<f64>()
                .map_err(|e| bad(&e.to_string()))
        };
        let int = |i: usize| -> Result<u64> {
            params
                .get(i)
                .ok_or_else(|| bad("missing parameter"))?
                .trim()
                .parse::<u64>()
                .map_err(|e| bad(&e.to_string()))
        };
        let int_or = |i: usize, default: u64| if params.len() > i { int(i) } else { Ok(default) };
        let arity = |lo: usize, hi: usize| {
            if params.len() < lo || params.len() > hi {
                Err(bad(&format!("expected {lo} to {hi} parameters")))
            } else {
                Ok(())
            }
        };
        let b = match name {
            "identity" => {
                arity(0, 1)?;
                Builtin::Identity {
                    dim: int_or(0, 2)? as usize,
                }
            }
            "phase_flip" => {
                arity(1, 1)?;
                Builtin::PhaseFlip { p: float(0)? }
            }
            "depolarizing" => {
                arity(1, 2)?;
                Builtin::Depolarizing {
                    p: float(0)?,
                    dim: int_or(1, 2)? as usize,
                }
            }
            "amplitude_damping" => {
                arity(1, 1)?;
                Builtin::AmplitudeDamping { gamma: float(0)? }
            }
            "haar_random" => {
                arity(3, 4)?;
                Builtin::HaarRandom {
                    input_dim: int(0)? as usize,
                    output_dim: int(1)? as usize,
                    kraus_count: int(2)? as usize,
                    seed: int_or(3, 0)?,
                }
            }
            "haar_random_unitary" => {
                arity(2, 3)?;
                Builtin::HaarRandomUnitary {
                    dim: int(0)? as usize,
                    count: int(1)? as usize,
                    seed: int_or(2, 0)?,
                }
            }
            other => return Err(Error::Parse(format!("unknown builtin channel `{other}`"))),
        };
        Ok(b)
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Identity { dim } => write!(f, "identity:{dim}"),
            Builtin::PhaseFlip { p } => write!(f, "phase_flip:{p}"),
            Builtin::Depolarizing { p, dim } => write!(f, "depolarizing:{p},{dim}"),
            Builtin::AmplitudeDamping { gamma } => write!(f, "amplitude_damping:{gamma}"),
            Builtin::HaarRandom {
                input_dim,
                output_dim,
                kraus_count,
                seed,
            } => write!(f, "haar_random:{input_dim},{output_dim},{kraus_count},{seed}"),
            Builtin::HaarRandomUnitary { dim, count, seed } => {
                write!(f, "haar_random_unitary:{dim},{count},{seed}")
            }
        }
    }
}

/// Convenience wrapper over [`Builtin`].
pub fn make_channel(spec: &str) -> Result<KrausChannel> {
    spec.parse::<Builtin>()?.build()
}

/// On-disk channel layout: each matrix is an array of rows of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub name: String,
    pub input_dim: usize,
    pub output_dim: usize,
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

/// Serializes a matrix as rows of `[re, im]` pairs.
pub fn matrix_to_rows(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(Error::Parse("empty matrix".into()));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    Ok(ComplexMatrix::from_fn(nrows, ncols, |i, j| {
        C64::new(rows[i][j][0], rows[i][j][1])
    }))
}

impl ChannelFile {
    pub fn from_channel(ch: &KrausChannel) -> Self {
        ChannelFile {
            name: ch.name.clone().unwrap_or_default(),
            input_dim: ch.input_dim,
            output_dim: ch.output_dim,
            kraus: ch.kraus.iter().map(matrix_to_rows).collect(),
        }
    }

    pub fn into_channel(self) -> Result<KrausChannel> {
        let mut kraus = Vec::with_capacity(self.kraus.len());
        for (k, rows) in self.kraus.iter().enumerate() {
            let m = matrix_from_rows(rows)?;
            if m.shape() != (self.output_dim, self.input_dim) {
                return Err(Error::Parse(format!(
                    "Kraus operator {k} is {}x{}, header says {}x{}",
                    m.nrows(),
                    m.ncols(),
                    self.output_dim,
                    self.input_dim
                )));
            }
            kraus.push(m);
        }
        if kraus.is_empty() {
            return Err(Error::Parse("no Kraus operators".into()));
        }
        let ch = KrausChannel::new(kraus)?;
        Ok(if self.name.is_empty() {
            ch
        } else {
            ch.with_name(self.name)
        })
    }
}

impl KrausChannel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ChannelFile::from_channel(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ChannelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.into_channel()
    }
}
