//! Typical sequences, typical subspaces and reduced block channels.
//!
//! A sequence `a ∈ ℵⁿ` is ε-typical when
//! `2^{-n(H+ε)} ≤ p_a ≤ 2^{-n(H-ε)}` (inclusive). Since `p_a` depends only on
//! the symbol counts of `a`, everything here works on type classes
//! (compositions of `n`) and enumerates individual sequences only on request.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{coherent_information, entropy_exchange, KrausChannel};
use crate::code_fidelity::{normalized_projector, CodeSubspace};
use crate::error::{Error, Result};
use crate::matrix::{
    eigh_unchecked, entropy_of_spectrum, pairwise_sum, shannon_entropy, ComplexMatrix, DensityOperator, Limits,
    ProbabilityDistribution, C64, PSD_TOL,
};

/// Largest `|ℵ|ⁿ` for explicit sequence enumeration.
pub const MAX_ENUMERATED_SEQUENCES: u128 = 10_000_000;
/// Off-diagonal Gram entries above this mean the Kraus family is not diagonal.
pub const DIAGONAL_TOL: f64 = 1e-10;

/// Inclusive test `|-log2(p)/n - H| ≤ ε`, with slack for rounding in `log2 p`.
fn within_window(log2_p: f64, n: usize, entropy: f64, epsilon: f64) -> bool {
    let nf = n as f64;
    let slack = 1e-12 * nf.max(1.0);
    log2_p >= -nf * (entropy + epsilon) - slack && log2_p <= -nf * (entropy - epsilon) + slack
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalSetSpec {
    pub distribution: ProbabilityDistribution,
    pub n: usize,
    pub epsilon: f64,
}

impl TypicalSetSpec {
    pub fn new(distribution: ProbabilityDistribution, n: usize, epsilon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("block length must be at least 1".into()));
        }
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!("epsilon {epsilon} must be positive")));
        }
        Ok(TypicalSetSpec {
            distribution,
            n,
            epsilon,
        })
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.distribution)
    }
}

/// All sequences sharing the symbol counts `counts`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeClass {
    /// Count per symbol of the full alphabet (zero for zero-probability symbols).
    pub counts: Vec<usize>,
    /// Number of sequences in the class (multinomial coefficient).
    pub size: u128,
    /// `log2 p_a` of any member.
    pub log2_prob: f64,
    pub typical: bool,
}

impl TypeClass {
    /// `size · p_a`.
    pub fn mass(&self) -> f64 {
        self.size as f64 * self.log2_prob.exp2()
    }
}

/// Compositions of `n` into `parts` non-negative parts, lexicographic.
pub fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(left - c, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if n == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(n, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

/// `n! / (c_1! … c_k!)`, or a resource error on `u128` overflow.
pub fn multinomial(counts: &[usize]) -> Result<u128> {
    let mut total: u128 = 1;
    let mut seen: u128 = 0;
    for &c in counts {
        for i in 1..=c as u128 {
            seen += 1;
            // C(seen, i) built incrementally stays integral at every step
            total = total.checked_mul(seen).ok_or(Error::DimensionLimit {
                what: "multinomial coefficient".into(),
                requested: usize::MAX,
                cap: usize::MAX,
            })? / i;
        }
    }
    Ok(total)
}

/// Type classes of `ℵⁿ` restricted to the support of `P`, with typicality flags.
pub fn type_classes(spec: &TypicalSetSpec) -> Result<Vec<TypeClass>> {
    let weights = spec.distribution.weights();
    let support: Vec<usize> = (0..weights.len()).filter(|&a| weights[a] > 0.0).collect();
    let log2w: Vec<f64> = support.iter().map(|&a| weights[a].log2()).collect();
    let h = spec.entropy();
    compositions(spec.n, support.len())
        .into_par_iter()
        .map(|comp| {
            let size = multinomial(&comp)?;
            let log2_prob: f64 = comp.iter().zip(&log2w).map(|(&c, &l)| c as f64 * l).sum();
            let mut counts = vec![0; weights.len()];
            for (&a, &c) in support.iter().zip(&comp) {
                counts[a] = c;
            }
            Ok(TypeClass {
                counts,
                size,
                log2_prob,
                typical: within_window(log2_prob, spec.n, h, spec.epsilon),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalSetReport {
    pub n: usize,
    pub epsilon: f64,
    pub entropy: f64,
    pub typical_count: u128,
    /// `2^{n(H+ε)}`.
    pub count_bound: f64,
    /// Probability of the typical set.
    pub mass: f64,
    pub typical_classes: usize,
    pub count_within_bound: bool,
}

/// Size and probability of the ε-typical set.
pub fn typical_sequences(spec: &TypicalSetSpec) -> Result<TypicalSetReport> {
    let classes = type_classes(spec)?;
    let typical: Vec<&TypeClass> = classes.iter().filter(|c| c.typical).collect();
    let mut count: u128 = 0;
    for c in &typical {
        count = count.checked_add(c.size).ok_or(Error::DimensionLimit {
            what: "typical sequence count".into(),
            requested: usize::MAX,
            cap: usize::MAX,
        })?;
    }
    let masses: Vec<f64> = typical.iter().map(|c| c.mass()).collect();
    let h = spec.entropy();
    let count_bound = (spec.n as f64 * (h + spec.epsilon)).exp2();
    Ok(TypicalSetReport {
        n: spec.n,
        epsilon: spec.epsilon,
        entropy: h,
        typical_count: count,
        count_bound,
        mass: pairwise_sum(&masses).min(1.0),
        typical_classes: typical.len(),
        count_within_bound: (count as f64) <= count_bound,
    })
}

/// Explicit list of typical sequences (symbol indices), first symbol slowest.
pub fn enumerate_typical_sequences(spec: &TypicalSetSpec) -> Result<Vec<Vec<usize>>> {
    let weights = spec.distribution.weights();
    let alphabet = weights.len();
    let total = (alphabet as u128).checked_pow(spec.n as u32).unwrap_or(u128::MAX);
    if total > MAX_ENUMERATED_SEQUENCES {
        return Err(Error::DimensionLimit {
            what: "enumerated sequences".into(),
            requested: total.min(usize::MAX as u128) as usize,
            cap: MAX_ENUMERATED_SEQUENCES as usize,
        });
    }
    let typical: Vec<Vec<usize>> = type_classes(spec)?
        .into_iter()
        .filter(|c| c.typical)
        .map(|c| c.counts)
        .collect();
    Ok(sequences_with_types(alphabet, spec.n, &typical))
}

/// All sequences of length `n` whose symbol counts appear in `types`.
fn sequences_with_types(alphabet: usize, n: usize, types: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if types.is_empty() {
        return out;
    }
    let mut seq = vec![0usize; n];
    loop {
        let mut counts = vec![0usize; alphabet];
        for &s in &seq {
            counts[s] += 1;
        }
        if types.contains(&counts) {
            out.push(seq.clone());
        }
        // mixed-radix increment, last position fastest
        let mut pos = n;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            seq[pos] += 1;
            if seq[pos] < alphabet {
                break;
            }
            seq[pos] = 0;
        }
    }
}

/// Span of the ε-typical eigenvectors of `ρ^{⊗n}`, stored as the eigenbasis of
/// `ρ` and a membership mask over multi-indices (first factor slowest).
#[derive(Debug, Clone)]
pub struct TypicalSubspace {
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
    n: usize,
    epsilon: f64,
    entropy: f64,
    mask: Vec<bool>,
}

impl TypicalSubspace {
    pub fn new(rho: &DensityOperator, n: usize, epsilon: f64, limits: &Limits) -> Result<Self> {
        if !rho.is_normalized() {
            return Err(Error::InvalidDensity(format!("trace {} is not 1", rho.trace())));
        }
        if n == 0 || epsilon.is_nan() || epsilon <= 0.0 {
            return Err(Error::InvalidParameter("need n >= 1 and epsilon > 0".into()));
        }
        let d = rho.dim();
        let total = d.checked_pow(n as u32).unwrap_or(usize::MAX);
        limits.check_dim("typical subspace ambient dimension", total)?;
        let e = eigh_unchecked(rho.matrix());
        let eigenvalues: Vec<f64> = e.values.iter().map(|&l| if l > PSD_TOL { l } else { 0.0 }).collect();
        let entropy = entropy_of_spectrum(&eigenvalues);
        let log2l: Vec<f64> = eigenvalues
            .iter()
            .map(|&l| if l > 0.0 { l.log2() } else { f64::NEG_INFINITY })
            .collect();
        let mut mask = vec![false; total];
        let mut digits = vec![0usize; n];
        for slot in mask.iter_mut() {
            let lp: f64 = digits.iter().map(|&j| log2l[j]).sum();
            *slot = lp.is_finite() && within_window(lp, n, entropy, epsilon);
            for pos in (0..n).rev() {
                digits[pos] += 1;
                if digits[pos] < d {
                    break;
                }
                digits[pos] = 0;
            }
        }
        Ok(TypicalSubspace {
            eigenvalues,
            eigenvectors: e.vectors,
            n,
            epsilon,
            entropy,
            mask,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `S(ρ)`.
    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn rank(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// `2^{n(S(ρ)+ε)}`.
    pub fn rank_bound(&self) -> f64 {
        (self.n as f64 * (self.entropy + self.epsilon)).exp2()
    }

    /// `tr Π ρ^{⊗n}`.
    pub fn mass(&self) -> f64 {
        let d = self.eigenvalues.len();
        let mut terms = Vec::new();
        for (r, &m) in self.mask.iter().enumerate() {
            if m {
                let mut idx = r;
                let mut p = 1.0;
                for _ in 0..self.n {
                    p *= self.eigenvalues[idx % d];
                    idx /= d;
                }
                terms.push(p);
            }
        }
        pairwise_sum(&terms)
    }

    /// `V^{⊗n}` for the eigenbasis `V` of `ρ`.
    pub fn basis_power(&self, limits: &Limits) -> Result<ComplexMatrix> {
        let total = self.mask.len();
        limits.check_shape("typical subspace basis", total, total, 1)?;
        let mut v = self.eigenvectors.clone();
        for _ in 1..self.n {
            v = v.kronecker(&self.eigenvectors);
        }
        Ok(v)
    }

    /// Dense projector onto the typical subspace.
    pub fn projector(&self, limits: &Limits) -> Result<ComplexMatrix> {
        let v = self.basis_power(limits)?;
        let cols: Vec<usize> = (0..self.mask.len()).filter(|&r| self.mask[r]).collect();
        let sel = v.select_columns(cols.iter());
        Ok(&sel * sel.adjoint())
    }
}

/// Dense projector onto the typical subspace of `ρ^{⊗n}`.
pub fn typical_subspace_projector(
    rho: &DensityOperator,
    n: usize,
    epsilon: f64,
    limits: &Limits,
) -> Result<ComplexMatrix> {
    TypicalSubspace::new(rho, n, epsilon, limits)?.projector(limits)
}

/// `P(A_k) = tr A_k†A_k / |Q|` for a trace-preserving channel with diagonal Gram matrix.
pub fn kraus_distribution(ch: &KrausChannel) -> Result<ProbabilityDistribution> {
    ch.require_trace_preserving()?;
    let g = ch.gram_matrix();
    let n = ch.len();
    for i in 0..n {
        for j in 0..n {
            if i != j && g[(i, j)].norm() > DIAGONAL_TOL {
                return Err(Error::InvalidParameter(
                    "Kraus family is not diagonal; diagonalize the channel first".into(),
                ));
            }
        }
    }
    let q = ch.input_dim() as f64;
    let weights: Vec<f64> = (0..n).map(|i| g[(i, i)].re / q).collect();
    let total: f64 = weights.iter().sum();
    ProbabilityDistribution::new(weights.iter().map(|w| w / total).collect())
}

/// The ε-typical part of `N^{⊗n}`: only Kraus products `A_{j1} ⊗ … ⊗ A_{jn}`
/// whose index sequence is ε-typical for [`kraus_distribution`].
#[derive(Debug, Clone)]
pub struct TypicalChannel {
    base: KrausChannel,
    spec: TypicalSetSpec,
    classes: Vec<TypeClass>,
}

impl TypicalChannel {
    /// Diagonalizes `ch` and keeps its typical Kraus products.
    pub fn new(ch: &KrausChannel, n: usize, epsilon: f64) -> Result<Self> {
        ch.require_trace_preserving()?;
        let base = ch.diagonalize();
        let distribution = kraus_distribution(&base)?;
        let spec = TypicalSetSpec::new(distribution, n, epsilon)?;
        let classes = type_classes(&spec)?.into_iter().filter(|c| c.typical).collect();
        Ok(TypicalChannel { base, spec, classes })
    }

    /// The diagonal single-letter channel.
    pub fn base(&self) -> &KrausChannel {
        &self.base
    }

    pub fn spec(&self) -> &TypicalSetSpec {
        &self.spec
    }

    pub fn typical_types(&self) -> &[TypeClass] {
        &self.classes
    }

    /// `|N_{ε,n}|`.
    pub fn length(&self) -> u128 {
        self.classes.iter().map(|c| c.size).sum()
    }

    /// `tr N_{ε,n}(π_n) = Σ_typical p_A`.
    pub fn transmission(&self) -> f64 {
        let masses: Vec<f64> = self.classes.iter().map(|c| c.mass()).collect();
        pairwise_sum(&masses)
    }

    /// Typical index sequences, first factor slowest.
    pub fn sequences(&self) -> Result<Vec<Vec<usize>>> {
        let types: Vec<Vec<usize>> = self.classes.iter().map(|c| c.counts.clone()).collect();
        let total = (self.base.len() as u128)
            .checked_pow(self.spec.n as u32)
            .unwrap_or(u128::MAX);
        if total > MAX_ENUMERATED_SEQUENCES {
            return Err(Error::DimensionLimit {
                what: "enumerated Kraus sequences".into(),
                requested: total.min(usize::MAX as u128) as usize,
                cap: MAX_ENUMERATED_SEQUENCES as usize,
            });
        }
        Ok(sequences_with_types(self.base.len(), self.spec.n, &types))
    }

    fn product(&self, seq: &[usize]) -> ComplexMatrix {
        let ops = self.base.kraus();
        seq[1..]
            .iter()
            .fold(ops[seq[0]].clone(), |acc, &j| acc.kronecker(&ops[j]))
    }

    /// Dense Kraus family. With no typical sequence this is the zero map.
    pub fn materialize(&self, limits: &Limits) -> Result<KrausChannel> {
        let n = self.spec.n as u32;
        let rows = self.base.output_dim().checked_pow(n).unwrap_or(usize::MAX);
        let cols = self.base.input_dim().checked_pow(n).unwrap_or(usize::MAX);
        let count = usize::try_from(self.length()).unwrap_or(usize::MAX);
        limits.check_shape("typical channel Kraus family", rows, cols, count.max(1))?;
        let mut kraus: Vec<ComplexMatrix> = self.sequences()?.iter().map(|s| self.product(s)).collect();
        if kraus.is_empty() {
            kraus.push(ComplexMatrix::zeros(rows, cols));
        }
        KrausChannel::new(kraus)
    }
}

/// `Ñ_{ε,n} = T_{ε,n} ∘ N_{ε,n}`, with `T` the projection onto the typical
/// subspace of `N(π)^{⊗n}`.
#[derive(Debug, Clone)]
pub struct ReducedChannel {
    typical: TypicalChannel,
    subspace: TypicalSubspace,
}

impl ReducedChannel {
    pub fn new(ch: &KrausChannel, n: usize, epsilon: f64, limits: &Limits) -> Result<Self> {
        let typical = TypicalChannel::new(ch, n, epsilon)?;
        let out = DensityOperator::new(crate::matrix::hermitian_part(&ch.output_on_uniform()))?;
        let subspace = TypicalSubspace::new(&out, n, epsilon, limits)?;
        Ok(ReducedChannel { typical, subspace })
    }

    pub fn typical_channel(&self) -> &TypicalChannel {
        &self.typical
    }

    pub fn subspace(&self) -> &TypicalSubspace {
        &self.subspace
    }

    /// `|Ñ_{ε,n}|`: the projected typical Kraus products.
    pub fn length(&self) -> u128 {
        self.typical.length()
    }

    /// Dense Kraus family `{Π A : A typical}`.
    pub fn materialize(&self, limits: &Limits) -> Result<KrausChannel> {
        let typical = self.typical.materialize(limits)?;
        let proj = self.subspace.projector(limits)?;
        KrausChannel::new(typical.kraus().iter().map(|a| &proj * a).collect())
    }

    /// `V^{⊗n}† N_{ε,n}(π_n) V^{⊗n}` in the eigenbasis of `N(π)`, summed over
    /// typical types by extending count vectors one tensor factor at a time.
    fn output_in_eigenbasis(&self, limits: &Limits) -> Result<ComplexMatrix> {
        let base = self.typical.base();
        let n = self.typical.spec().n;
        let v = self.subspace.eigenvectors();
        let q = base.input_dim() as f64;
        let factors: Vec<ComplexMatrix> = base
            .kraus()
            .iter()
            .map(|a| (v.adjoint() * a * a.adjoint() * v).unscale(q))
            .collect();
        let targets: Vec<&[usize]> = self
            .typical
            .typical_types()
            .iter()
            .map(|c| c.counts.as_slice())
            .collect();
        let d = v.nrows();
        let full = d.checked_pow(n as u32).unwrap_or(usize::MAX);
        if targets.is_empty() {
            return Ok(ComplexMatrix::zeros(full, full));
        }
        let reachable = |c: &[usize]| targets.iter().any(|t| t.iter().zip(c).all(|(a, b)| a >= b));

        let mut level: BTreeMap<Vec<usize>, ComplexMatrix> = BTreeMap::new();
        level.insert(
            vec![0; factors.len()],
            ComplexMatrix::from_element(1, 1, C64::new(1.0, 0.0)),
        );
        for step in 1..=n {
            let side = d.pow(step as u32);
            let mut next: BTreeMap<Vec<usize>, ComplexMatrix> = BTreeMap::new();
            for (counts, m) in &level {
                for (j, x) in factors.iter().enumerate() {
                    let mut c = counts.clone();
                    c[j] += 1;
                    if !reachable(&c) {
                        continue;
                    }
                    let term = m.kronecker(x);
                    match next.get_mut(&c) {
                        Some(acc) => *acc += term,
                        None => {
                            limits.check_elements(
                                "reduced channel accumulators",
                                (next.len() + 1).saturating_mul(side * side),
                            )?;
                            next.insert(c, term);
                        }
                    }
                }
            }
            level = next;
        }
        let mut total = ComplexMatrix::zeros(full, full);
        for (counts, m) in level {
            if targets.contains(&counts.as_slice()) {
                total += m;
            }
        }
        Ok(total)
    }

    pub fn report(&self, limits: &Limits) -> Result<ReducedChannelReport> {
        let spec = self.typical.spec();
        let (n, eps) = (spec.n, spec.epsilon);
        let s = self.output_in_eigenbasis(limits)?;
        let mask = self.subspace.mask();
        let rows: Vec<usize> = (0..mask.len()).filter(|&r| mask[r]).collect();
        let diag: Vec<f64> = rows.iter().map(|&r| s[(r, r)].re).collect();
        let mut frob = Vec::with_capacity(rows.len());
        for &r in &rows {
            let row: Vec<f64> = rows.iter().map(|&c| s[(r, c)].norm_sqr()).collect();
            frob.push(pairwise_sum(&row));
        }
        let transmission = pairwise_sum(&diag);
        let frobenius_sq = pairwise_sum(&frob);

        let pi = DensityOperator::maximally_mixed(self.typical.base().input_dim());
        let s_e = entropy_exchange(&pi, self.typical.base())?;
        let s_out = self.subspace.entropy();
        let length = self.length();
        let typical_length = self.typical.length();
        let length_bound = (n as f64 * (s_e + eps)).exp2();
        let frobenius_bound = (-(n as f64) * (s_out - 3.0 * eps)).exp2();
        let typical_transmission = self.typical.transmission();
        let subspace_mass = self.subspace.mass();
        let transmission_floor = subspace_mass - (1.0 - typical_transmission);
        Ok(ReducedChannelReport {
            n,
            epsilon: eps,
            entropy_exchange: s_e,
            output_entropy: s_out,
            typical_length,
            length,
            length_bound,
            typical_transmission,
            subspace_mass,
            subspace_rank: self.subspace.rank(),
            transmission,
            transmission_floor,
            frobenius_sq,
            frobenius_bound,
            typical_length_within_bound: (typical_length as f64) <= length_bound,
            length_within_bound: (length as f64) <= length_bound,
            frobenius_within_bound: frobenius_sq <= frobenius_bound,
            transmission_above_floor: transmission >= transmission_floor - 1e-12,
        })
    }
}

/// Exact checks on `N_{ε,n}` and `Ñ_{ε,n}` at one block length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedChannelReport {
    pub n: usize,
    pub epsilon: f64,
    /// `S_e(π, N)`.
    pub entropy_exchange: f64,
    /// `S(N(π))`.
    pub output_entropy: f64,
    /// `|N_{ε,n}|`.
    pub typical_length: u128,
    /// `|Ñ_{ε,n}|`.
    pub length: u128,
    /// `2^{n(S_e + ε)}`.
    pub length_bound: f64,
    /// `tr N_{ε,n}(π_n)`.
    pub typical_transmission: f64,
    /// `tr Π N(π)^{⊗n}`.
    pub subspace_mass: f64,
    pub subspace_rank: usize,
    /// `tr Ñ_{ε,n}(π_n)`.
    pub transmission: f64,
    /// `tr Π N^{⊗n}(π_n) - tr M_{ε,n}(π_n)` for the untypical remainder `M`.
    pub transmission_floor: f64,
    /// `‖Ñ_{ε,n}(π_n)‖²_F`.
    pub frobenius_sq: f64,
    /// `2^{-n(S(N(π)) - 3ε)}`.
    pub frobenius_bound: f64,
    pub typical_length_within_bound: bool,
    pub length_within_bound: bool,
    pub frobenius_within_bound: bool,
    pub transmission_above_floor: bool,
}

impl ReducedChannelReport {
    /// The three exact relations: both length bounds and the Frobenius bound.
    pub fn exact_relations_hold(&self) -> bool {
        self.typical_length_within_bound && self.length_within_bound && self.frobenius_within_bound
    }
}

/// Log-linear fit of deviations from 1 against block length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub epsilon: f64,
    pub n_values: Vec<usize>,
    pub deviations: Vec<f64>,
    /// Slope of `ln(deviation)` against `n`, over points with deviation in `(0, 1)`.
    pub slope: Option<f64>,
    /// `-slope`.
    pub fitted_rate: Option<f64>,
    /// Variance of `-log2 P(a)`.
    pub sigma_sq: f64,
    /// `ε² / (2σ²)`.
    pub predicted_rate: f64,
}

impl DecayFit {
    pub fn new(epsilon: f64, n_values: Vec<usize>, deviations: Vec<f64>, sigma_sq: f64) -> Self {
        let pts: Vec<(f64, f64)> = n_values
            .iter()
            .zip(&deviations)
            .filter(|(_, &d)| d > 0.0 && d < 1.0)
            .map(|(&n, &d)| (n as f64, d.ln()))
            .collect();
        let slope = (pts.len() >= 3).then(|| {
            let k = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
            sxy / sxx
        });
        DecayFit {
            epsilon,
            n_values,
            deviations,
            slope,
            fitted_rate: slope.map(|s| -s),
            sigma_sq,
            predicted_rate: epsilon * epsilon / (2.0 * sigma_sq),
        }
    }

    /// Fitted and predicted rates agree within `factor` in either direction.
    pub fn rate_within_factor(&self, factor: f64) -> bool {
        match self.fitted_rate {
            Some(r) if r > 0.0 && self.predicted_rate > 0.0 => {
                let q = r / self.predicted_rate;
                q <= factor && q >= 1.0 / factor
            }
            _ => false,
        }
    }
}

/// Variance of `-log2 P(a)` under `P`.
pub fn surprisal_variance(p: &ProbabilityDistribution) -> f64 {
    let h = shannon_entropy(p);
    p.weights()
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| w * (-w.log2() - h).powi(2))
        .sum()
}

/// `1 - P_{ε,n}` over `n_values`, with its decay fit.
pub fn typical_set_decay(
    p: &ProbabilityDistribution,
    epsilon: f64,
    n_values: &[usize],
) -> Result<(Vec<TypicalSetReport>, DecayFit)> {
    let reports = n_values
        .iter()
        .map(|&n| typical_sequences(&TypicalSetSpec::new(p.clone(), n, epsilon)?))
        .collect::<Result<Vec<_>>>()?;
    let deviations = reports.iter().map(|r| 1.0 - r.mass).collect();
    let fit = DecayFit::new(epsilon, n_values.to_vec(), deviations, surprisal_variance(p));
    Ok((reports, fit))
}

/// Reduced-channel reports over a range of block lengths, with the decay fit of
/// `1 - tr Ñ_{ε,n}(π_n)`.
pub fn verify_reduced_channels(
    ch: &KrausChannel,
    n_values: &[usize],
    epsilon: f64,
    limits: &Limits,
) -> Result<(Vec<ReducedChannelReport>, DecayFit)> {
    let reports = n_values
        .iter()
        .map(|&n| ReducedChannel::new(ch, n, epsilon, limits)?.report(limits))
        .collect::<Result<Vec<_>>>()?;
    let dist = kraus_distribution(&ch.diagonalize())?;
    let deviations = reports.iter().map(|r| 1.0 - r.transmission).collect();
    let fit = DecayFit::new(epsilon, n_values.to_vec(), deviations, surprisal_variance(&dist));
    Ok((reports, fit))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    /// `⌊2^{nR}⌋`.
    pub code_dim: f64,
    pub reduced_length: u128,
    pub transmission: f64,
    /// `√(K_n |Ñ|) ‖Ñ(π_n)‖_F`.
    pub penalty: f64,
    /// `transmission - penalty`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateDemo {
    pub rate: f64,
    pub epsilon: f64,
    /// `I(π, N)`.
    pub coherent_information: f64,
    /// `R + 4ε < I(π, N)`.
    pub rate_condition: bool,
    pub rows: Vec<RateRow>,
    /// `penalty[n+1] / penalty[n]`; `None` where `penalty[n]` is zero.
    pub penalty_ratios: Vec<Option<f64>>,
    /// Every successive ratio exists and is below 1.
    pub penalty_decreasing: bool,
    /// Every successive ratio exists and is above 1.
    pub penalty_increasing: bool,
}

/// Averaged fidelity bound for rate-`R` block codes through the reduced channel.
pub fn achievable_rate_demo(
    ch: &KrausChannel,
    rate: f64,
    epsilon: f64,
    n_values: &[usize],
    limits: &Limits,
) -> Result<RateDemo> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "rate {rate} must be a non-negative number"
        )));
    }
    let pi = DensityOperator::maximally_mixed(ch.input_dim());
    let info = coherent_information(&pi, ch)?;
    let mut rows = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let r = ReducedChannel::new(ch, n, epsilon, limits)?.report(limits)?;
        let code_dim = (n as f64 * rate).exp2().floor();
        let penalty = (code_dim * r.length as f64).sqrt() * r.frobenius_sq.sqrt();
        rows.push(RateRow {
            n,
            code_dim,
            reduced_length: r.length,
            transmission: r.transmission,
            penalty,
            bound: r.transmission - penalty,
        });
    }
    let penalty_ratios: Vec<Option<f64>> = rows
        .windows(2)
        .map(|w| (w[0].penalty > 0.0).then(|| w[1].penalty / w[0].penalty))
        .collect();
    let nonempty = !penalty_ratios.is_empty();
    Ok(RateDemo {
        rate,
        epsilon,
        coherent_information: info,
        rate_condition: rate + 4.0 * epsilon < info,
        penalty_decreasing: nonempty && penalty_ratios.iter().all(|r| matches!(r, Some(x) if *x < 1.0)),
        penalty_increasing: nonempty && penalty_ratios.iter().all(|r| matches!(r, Some(x) if *x > 1.0)),
        penalty_ratios,
        rows,
    })
}

/// `I(π_V, N)` for the maximally mixed state on the subspace `V`.
pub fn subspace_restricted_info(ch: &KrausChannel, code: &CodeSubspace) -> Result<f64> {
    coherent_information(&normalized_projector(code), ch)
}
