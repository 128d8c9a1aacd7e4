//! Dense complex linear algebra and probability primitives.
//!
//! Matrices are `nalgebra` dense matrices over [`C64`]. Everything here is a
//! pure function of its arguments; randomness always comes in through an
//! explicit `Rng` argument.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use num_complex::Complex64 as C64;

pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Absolute tolerance for Hermiticity checks (max entry of `M - M†`).
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues down to `-PSD_TOL` are treated as numerical zeros.
pub const PSD_TOL: f64 = 1e-10;
/// Trace tolerance for density operators.
pub const TRACE_TOL: f64 = 1e-10;
/// Tolerance on the total weight of a probability distribution.
pub const DISTRIBUTION_TOL: f64 = 1e-12;

/// Size caps on constructed matrices.
///
/// `max_dim` bounds the number of rows and columns of any single matrix;
/// `max_elements` bounds the total number of complex entries a construction
/// may allocate (a tensor-power Kraus family counts all of its operators).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_dim: usize,
    pub max_elements: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_dim: 1 << 16,
            max_elements: 1 << 24,
        }
    }
}

impl Limits {
    pub fn check_dim(&self, what: &str, dim: usize) -> Result<()> {
        if dim > self.max_dim {
            return Err(Error::DimensionLimit {
                what: what.to_string(),
                requested: dim,
                cap: self.max_dim,
            });
        }
        Ok(())
    }

    pub fn check_elements(&self, what: &str, elements: usize) -> Result<()> {
        if elements > self.max_elements {
            return Err(Error::DimensionLimit {
                what: what.to_string(),
                requested: elements,
                cap: self.max_elements,
            });
        }
        Ok(())
    }

    /// Checks a `rows x cols` allocation repeated `copies` times.
    pub fn check_shape(&self, what: &str, rows: usize, cols: usize, copies: usize) -> Result<()> {
        self.check_dim(what, rows)?;
        self.check_dim(what, cols)?;
        let elements = rows
            .checked_mul(cols)
            .and_then(|e| e.checked_mul(copies))
            .unwrap_or(usize::MAX);
        self.check_elements(what, elements)
    }
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest absolute entry of `m - m†`.
pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    hermitian_deviation(m) <= tol
}

/// `(m + m†) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Kronecker product under the default [`Limits`].
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    tensor_with(a, b, &Limits::default())
}

pub fn tensor_with(a: &ComplexMatrix, b: &ComplexMatrix, limits: &Limits) -> Result<ComplexMatrix> {
    let rows = a.nrows().saturating_mul(b.nrows());
    let cols = a.ncols().saturating_mul(b.ncols());
    limits.check_shape("tensor product", rows, cols, 1)?;
    Ok(a.kronecker(b))
}

/// Which factor of a bipartite space survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Keep {
    A,
    B,
}

/// Partial trace of an operator on `H_A ⊗ H_B`.
pub fn partial_trace(m: &ComplexMatrix, dim_a: usize, dim_b: usize, keep: Keep) -> Result<ComplexMatrix> {
    let kept = match keep {
        Keep::A => [0usize],
        Keep::B => [1usize],
    };
    partial_trace_multi(m, &[dim_a, dim_b], &kept)
}

/// Mixed-radix split of a flat index into (kept index, traced index).
fn split_index(flat: usize, dims: &[usize], keep_mask: &[bool]) -> (usize, usize) {
    let mut rem = flat;
    let mut kept = 0usize;
    let mut kept_stride = 1usize;
    let mut traced = 0usize;
    let mut traced_stride = 1usize;
    for (k, &d) in dims.iter().enumerate().rev() {
        let digit = rem % d;
        rem /= d;
        if keep_mask[k] {
            kept += digit * kept_stride;
            kept_stride *= d;
        } else {
            traced += digit * traced_stride;
            traced_stride *= d;
        }
    }
    (kept, traced)
}

fn keep_mask(dims: &[usize], keep: &[usize]) -> Result<(Vec<bool>, usize, usize)> {
    if dims.contains(&0) {
        return Err(Error::InvalidParameter("subsystem dimension 0".into()));
    }
    let mut mask = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() {
            return Err(Error::InvalidParameter(format!(
                "subsystem {k} out of range for {} factors",
                dims.len()
            )));
        }
        mask[k] = true;
    }
    let kept: usize = dims.iter().zip(&mask).filter(|(_, &m)| m).map(|(d, _)| d).product();
    let traced: usize = dims.iter().zip(&mask).filter(|(_, &m)| !m).map(|(d, _)| d).product();
    Ok((mask, kept, traced))
}

/// Partial trace over every factor of `dims` not listed in `keep`.
///
/// Kept factors stay in their original order.
pub fn partial_trace_multi(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.nrows() != total {
        return Err(Error::DimensionMismatch(format!(
            "partial trace of a {}x{} matrix over factors {:?}",
            m.nrows(),
            m.ncols(),
            dims
        )));
    }
    let (mask, kept_dim, traced_dim) = keep_mask(dims, keep)?;
    // group flat indices by their traced index
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::new(); traced_dim];
    for flat in 0..total {
        let (k, t) = split_index(flat, dims, &mask);
        groups[t].push((k, flat));
    }
    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
    for group in &groups {
        for &(ki, fi) in group {
            for &(kj, fj) in group {
                out[(ki, kj)] += m[(fi, fj)];
            }
        }
    }
    Ok(out)
}

/// Reduced density operator of the pure state `psi` on the factors `keep`.
pub fn reduced_state(psi: &ComplexVector, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if psi.len() != total {
        return Err(Error::DimensionMismatch(format!(
            "state of length {} over factors {:?}",
            psi.len(),
            dims
        )));
    }
    let (mask, kept_dim, traced_dim) = keep_mask(dims, keep)?;
    let mut amplitudes = ComplexMatrix::zeros(kept_dim, traced_dim);
    for (flat, &z) in psi.iter().enumerate() {
        let (k, t) = split_index(flat, dims, &mask);
        amplitudes[(k, t)] = z;
    }
    Ok(&amplitudes * amplitudes.adjoint())
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigh {
    /// Ascending.
    pub values: Vec<f64>,
    /// Columns are the eigenvectors, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl Eigh {
    /// `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let s = f(l);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

pub fn eigh(h: &ComplexMatrix) -> Result<Eigh> {
    let dev = hermitian_deviation(h);
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    if !is_finite(h) {
        return Err(Error::NonFinite);
    }
    Ok(eigh_unchecked(h))
}

/// Eigendecomposition of the Hermitian part of `h`, without the tolerance check.
pub(crate) fn eigh_unchecked(h: &ComplexMatrix) -> Eigh {
    let n = h.nrows();
    if n == 0 {
        return Eigh {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        };
    }
    let eig = hermitian_part(h).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Eigh { values, vectors }
}

pub fn eigenvalues_hermitian(h: &ComplexMatrix) -> Vec<f64> {
    let n = h.nrows();
    if n == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = hermitian_part(h).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Sum of singular values. Hermitian inputs use `Σ|λ|`.
pub fn trace_norm(a: &ComplexMatrix) -> f64 {
    if a.is_square() && is_hermitian(a, HERMITIAN_TOL) {
        eigenvalues_hermitian(a).iter().map(|l| l.abs()).sum()
    } else {
        a.singular_values().iter().sum()
    }
}

pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.norm()
}

/// Square root of a PSD matrix, with eigenvalues in `[-PSD_TOL, 0)` clamped.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let e = eigh(m)?;
    if let Some(&lowest) = e.values.first() {
        if lowest < -PSD_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {lowest:e}")));
        }
    }
    Ok(e.map(|l| l.max(0.0).sqrt()))
}

/// `-Σ λ log2 λ` over the positive part of a spectrum.
pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Density operator (possibly subnormalized).
#[derive(Debug, Clone)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    normalized: bool,
}

impl DensityOperator {
    /// Validates Hermiticity, positivity and `trace <= 1`.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidDensity(format!(
                "expected a non-empty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !is_finite(&matrix) {
            return Err(Error::NonFinite);
        }
        let dev = hermitian_deviation(&matrix);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let lowest = eigenvalues_hermitian(&matrix)[0];
        if lowest < -PSD_TOL {
            return Err(Error::InvalidDensity(format!("smallest eigenvalue {lowest:e}")));
        }
        let tr = matrix.trace();
        if tr.im.abs() > TRACE_TOL || tr.re > 1.0 + TRACE_TOL || tr.re < -TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let normalized = (tr.re - 1.0).abs() <= TRACE_TOL;
        Ok(DensityOperator {
            matrix: hermitian_part(&matrix),
            normalized,
        })
    }

    /// Like [`DensityOperator::new`] but requires unit trace.
    pub fn normalized(matrix: ComplexMatrix) -> Result<Self> {
        let rho = Self::new(matrix)?;
        if !rho.normalized {
            return Err(Error::InvalidDensity(format!("trace {} is not 1", rho.trace())));
        }
        Ok(rho)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityOperator {
            matrix: ComplexMatrix::identity(dim, dim).scale(1.0 / dim as f64),
            normalized: true,
        }
    }

    /// `|ψ⟩⟨ψ|` for a unit vector (normalized on the way in).
    pub fn pure(psi: &ComplexVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidDensity("zero or non-finite state vector".into()));
        }
        let v = psi.unscale(norm);
        Ok(DensityOperator {
            matrix: &v * v.adjoint(),
            normalized: true,
        })
    }

    /// Computational basis state `|index⟩⟨index|`.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidParameter(format!("basis index {index} >= {dim}")));
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(index, index)] = C64::new(1.0, 0.0);
        Ok(DensityOperator {
            matrix: m,
            normalized: true,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Ascending eigenvalues with numerical negatives clamped to zero.
    pub fn spectrum(&self) -> Vec<f64> {
        eigenvalues_hermitian(&self.matrix)
            .into_iter()
            .map(|l| l.max(0.0))
            .collect()
    }
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    if !rho.is_normalized() {
        return Err(Error::InvalidDensity(format!(
            "entropy needs a normalized state, trace is {}",
            rho.trace()
        )));
    }
    Ok(entropy_of_spectrum(&rho.spectrum()))
}

/// Fidelity `‖√ρ √σ‖₁²`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity of {}-dim and {}-dim states",
            rho.dim(),
            sigma.dim()
        )));
    }
    let a = psd_sqrt(rho.matrix())?;
    let b = psd_sqrt(sigma.matrix())?;
    let s: f64 = (&a * &b).singular_values().iter().sum();
    Ok((s * s).clamp(0.0, 1.0))
}

/// Nonnegative weights over an indexed alphabet summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityDistribution {
    weights: Vec<f64>,
}

impl ProbabilityDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidDistribution(format!("weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOL {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        Ok(ProbabilityDistribution { weights })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        Ok(ProbabilityDistribution {
            weights: vec![1.0 / size as f64; size],
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Shannon entropy in bits.
pub fn shannon_entropy(p: &ProbabilityDistribution) -> f64 {
    entropy_of_spectrum(p.weights())
}

/// Matrix with i.i.d. standard complex Gaussian entries (`E|z|² = 1`).
pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// Haar-distributed isometry: the first `cols` columns of a Haar unitary on `C^rows`.
///
/// QR of a complex Ginibre matrix, with the columns of `Q` rephased by
/// `r_ii / |r_ii|` so that the result does not depend on the phase convention
/// of the QR routine.
pub fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    assert!(cols >= 1 && cols <= rows, "haar_isometry needs 1 <= cols <= rows");
    let g = complex_gaussian(rows, cols, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        let n = d.norm();
        let phase = if n > 0.0 { d / n } else { C64::new(1.0, 0.0) };
        for i in 0..rows {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    haar_isometry(dim, dim, rng)
}

/// Random density operator `G G† / tr(G G†)` with a `dim x rank` Ginibre `G`.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> DensityOperator {
    let g = complex_gaussian(dim, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator {
        matrix: hermitian_part(&m.unscale(tr)),
        normalized: true,
    }
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    hermitian_part(&complex_gaussian(dim, dim, rng))
}

pub fn basis_vector(dim: usize, index: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(dim);
    v[index] = C64::new(1.0, 0.0);
    v
}

/// Purification `Σ √λ_i |i⟩_R ⊗ |v_i⟩` of a density operator, with the
/// ancilla `R` of dimension `rank(ρ)` (eigenvalues above `PSD_TOL`).
///
/// Returns the state vector on `R ⊗ Q` and the ancilla dimension.
pub fn purify(rho: &DensityOperator) -> (ComplexVector, usize) {
    let e = eigh_unchecked(rho.matrix());
    let dim = rho.dim();
    let kept: Vec<usize> = (0..dim).rev().filter(|&k| e.values[k] > PSD_TOL).collect();
    let rank = kept.len().max(1);
    let mut psi = ComplexVector::zeros(rank * dim);
    for (r, &k) in kept.iter().enumerate() {
        let w = e.values[k].sqrt();
        for q in 0..dim {
            psi[r * dim + q] = e.vectors[(q, k)] * w;
        }
    }
    (psi, rank)
}

/// `Σ A_k M A_k†` for a slice of operators.
pub fn sandwich_sum(ops: &[ComplexMatrix], m: &ComplexMatrix) -> ComplexMatrix {
    let rows = ops.first().map_or(0, |a| a.nrows());
    let mut out = ComplexMatrix::zeros(rows, rows);
    for a in ops {
        out += a * m * a.adjoint();
    }
    out
}

/// Pairwise summation; the result depends only on the order of `values`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn diag(values: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
            values.len(),
            values.iter().map(|&v| c(v)),
        ))
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
    }

    #[test]
    fn tensor_of_identities_and_diagonals() {
        let i2 = ComplexMatrix::identity(2, 2);
        assert_eq!(tensor(&i2, &i2).unwrap(), ComplexMatrix::identity(4, 4));
        assert_eq!(
            tensor(&diag(&[1.0, 2.0]), &diag(&[3.0, 4.0])).unwrap(),
            diag(&[3.0, 4.0, 6.0, 8.0])
        );
    }

    #[test]
    fn tensor_mixed_product_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let [a, b, cc, d]: [ComplexMatrix; 4] = std::array::from_fn(|_| complex_gaussian(2, 2, &mut rng));
            let lhs = tensor(&a, &b).unwrap() * tensor(&cc, &d).unwrap();
            let rhs = tensor(&(&a * &cc), &(&b * &d)).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn tensor_respects_dimension_cap() {
        let limits = Limits {
            max_dim: 8,
            max_elements: 1 << 20,
        };
        let a = ComplexMatrix::identity(4, 4);
        assert!(matches!(
            tensor_with(&a, &a, &limits),
            Err(Error::DimensionLimit { .. })
        ));
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = complex_gaussian(2, 2, &mut rng);
        let b = complex_gaussian(3, 3, &mut rng);
        let ab = tensor(&a, &b).unwrap();
        let ra = partial_trace(&ab, 2, 3, Keep::A).unwrap();
        assert!((ra - a.scale(1.0) * b.trace()).norm() < 1e-12);
        let rb = partial_trace(&ab, 2, 3, Keep::B).unwrap();
        assert!((rb - &b * a.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = ComplexVector::from_vec(vec![c(s), c(0.0), c(0.0), c(s)]);
        let rho = &psi * psi.adjoint();
        let ra = partial_trace(&rho, 2, 2, Keep::A).unwrap();
        assert!((ra - ComplexMatrix::identity(2, 2).scale(0.5)).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (da, db) in [(2, 3), (3, 2), (4, 4)] {
            let h = random_hermitian(da * db, &mut rng);
            for keep in [Keep::A, Keep::B] {
                let r = partial_trace(&h, da, db, keep).unwrap();
                assert!((r.trace() - h.trace()).norm() < 1e-12);
            }
        }
        assert!(partial_trace(&ComplexMatrix::identity(5, 5), 2, 3, Keep::A).is_err());
    }

    #[test]
    fn partial_trace_multi_matches_reduced_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dims = [2, 3, 2];
        let g = complex_gaussian(12, 1, &mut rng);
        let psi = ComplexVector::from_iterator(12, g.iter().copied());
        let rho = &psi * psi.adjoint();
        for keep in [vec![0], vec![1], vec![0, 2], vec![1, 2]] {
            let a = partial_trace_multi(&rho, &dims, &keep).unwrap();
            let b = reduced_state(&psi, &dims, &keep).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn eigh_examples() {
        let e = eigh(&diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        let e = eigh(&pauli_x()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        let bad = ComplexMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(matches!(eigh(&bad), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn eigh_reconstructs_large_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for dim in [1, 7, 64, 512] {
            let h = random_hermitian(dim, &mut rng);
            let e = eigh(&h).unwrap();
            let rebuilt = e.map(|l| l);
            assert!((rebuilt - &h).norm() <= 1e-9 * h.norm(), "dim {dim}");
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            let unitary_err = (e.vectors.adjoint() * &e.vectors - ComplexMatrix::identity(dim, dim)).norm();
            assert!(unitary_err < 1e-9);
        }
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&diag(&[1.0, -2.0])) - 3.0).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho = random_density(3, 3, &mut rng);
        assert_eq!(trace_norm(&(rho.matrix() - rho.matrix())), 0.0);
        for _ in 0..10 {
            let a = complex_gaussian(4, 3, &mut rng);
            // singular values from the spectrum of A†A
            let oracle: f64 = eigenvalues_hermitian(&(a.adjoint() * &a))
                .iter()
                .map(|l| l.max(0.0).sqrt())
                .sum();
            assert!((trace_norm(&a) - oracle).abs() < 1e-9);
        }
    }

    #[test]
    fn frobenius_examples() {
        assert!((frobenius_norm(&ComplexMatrix::identity(5, 5)) - 5f64.sqrt()).abs() < 1e-14);
        let pi = DensityOperator::maximally_mixed(8);
        assert!((frobenius_norm(pi.matrix()) - 8f64.powf(-0.5)).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for rank in 1..4 {
            let a = complex_gaussian(6, rank, &mut rng) * complex_gaussian(rank, 6, &mut rng);
            assert!(trace_norm(&a) <= (rank as f64).sqrt() * frobenius_norm(&a) + 1e-10);
        }
    }

    #[test]
    fn entropies() {
        let pure = DensityOperator::basis_state(3, 1).unwrap();
        assert_eq!(von_neumann_entropy(&pure).unwrap(), 0.0);
        let mixed = DensityOperator::maximally_mixed(2);
        assert!((von_neumann_entropy(&mixed).unwrap() - 1.0).abs() < 1e-15);
        let rho = DensityOperator::new(diag(&[0.75, 0.25])).unwrap();
        let h2 = -0.75 * 0.75f64.log2() - 0.25 * 0.25f64.log2();
        assert!((von_neumann_entropy(&rho).unwrap() - h2).abs() < 1e-14);
        assert!((h2 - 0.811278).abs() < 1e-6);
        let sub = DensityOperator::new(diag(&[0.25, 0.25])).unwrap();
        assert!(von_neumann_entropy(&sub).is_err());

        let p = |w: Vec<f64>| ProbabilityDistribution::new(w).unwrap();
        assert_eq!(shannon_entropy(&p(vec![1.0, 0.0])), 0.0);
        assert_eq!(shannon_entropy(&p(vec![0.5, 0.5])), 1.0);
        assert!((shannon_entropy(&p(vec![0.9, 0.1])) - 0.468996).abs() < 1e-6);
        assert!(ProbabilityDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityDistribution::new(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let zero = DensityOperator::basis_state(2, 0).unwrap();
        let one = DensityOperator::basis_state(2, 1).unwrap();
        let mixed = DensityOperator::maximally_mixed(2);
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&zero, &one).unwrap() < 1e-12);
        assert!((fidelity(&zero, &mixed).unwrap() - 0.5).abs() < 1e-12);
        assert!(fidelity(&zero, &DensityOperator::maximally_mixed(3)).is_err());
    }

    #[test]
    fn density_validation() {
        assert!(DensityOperator::new(diag(&[1.2, -0.2])).is_err());
        assert!(DensityOperator::new(diag(&[0.7, 0.7])).is_err());
        let sub = DensityOperator::new(diag(&[0.3, 0.2])).unwrap();
        assert!(!sub.is_normalized());
        assert!(DensityOperator::normalized(diag(&[0.3, 0.2])).is_err());
        let mut nan = diag(&[0.5, 0.5]);
        nan[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(DensityOperator::new(nan), Err(Error::NonFinite)));
    }

    #[test]
    fn haar_samples_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for dim in [1, 2, 5, 16] {
            let u = haar_unitary(dim, &mut rng);
            assert!((u.adjoint() * &u - ComplexMatrix::identity(dim, dim)).norm() <= 1e-10);
        }
        let v = haar_isometry(6, 2, &mut rng);
        assert!((v.adjoint() * &v - ComplexMatrix::identity(2, 2)).norm() <= 1e-10);
    }

    #[test]
    fn pairwise_sum_is_exact_on_small_inputs() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        let v: Vec<f64> = (1..=100).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&v), 5050.0);
    }
}
