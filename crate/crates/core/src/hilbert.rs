//! Truncated Fock-space kernel: mode spaces, dense operators, states,
//! tensor embedding, displacement and parity.
//!
//! Tensor products always order modes as listed in the [`ModeSpace`]; the
//! device space is `(resonator, transmon)`, so the basis index of `|n, l>` is
//! `n * dim_transmon + l`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const RESONATOR: &str = "a";
pub const TRANSMON: &str = "b";

#[inline]
pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Ordered list of labeled modes with their truncation dimensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeSpace {
    labels: Vec<String>,
    dims: Vec<usize>,
}

impl ModeSpace {
    pub fn new<S: AsRef<str>>(modes: &[(S, usize)]) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidDimension { dim: 0, min: 1 });
        }
        let mut labels: Vec<String> = Vec::with_capacity(modes.len());
        let mut dims = Vec::with_capacity(modes.len());
        for (label, dim) in modes {
            let label = label.as_ref();
            if *dim < 2 {
                return Err(Error::InvalidDimension { dim: *dim, min: 2 });
            }
            if labels.iter().any(|l| l == label) {
                return Err(Error::DuplicateMode(label.to_string()));
            }
            labels.push(label.to_string());
            dims.push(*dim);
        }
        Ok(Self { labels, dims })
    }

    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new(&[(label, dim)])
    }

    /// Storage resonator `a` of dimension `n_res` followed by the conversion
    /// transmon `b` of dimension `n_tr`.
    pub fn resonator_transmon(n_res: usize, n_tr: usize) -> Result<Self> {
        Self::new(&[(RESONATOR, n_res), (TRANSMON, n_tr)])
    }

    // Dimension-1 spaces only arise for degenerate single-mode helpers.
    fn single_unchecked(label: &str, dim: usize) -> Self {
        Self {
            labels: vec![label.to_string()],
            dims: vec![dim],
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn num_modes(&self) -> usize {
        self.dims.len()
    }

    pub fn slot(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.slot(label)?])
    }

    /// Flat basis index of the product state with the given occupations.
    pub fn index(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.len(),
                found: occupations.len(),
            });
        }
        let mut idx = 0;
        for (&n, &d) in occupations.iter().zip(&self.dims) {
            if n >= d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: n,
                });
            }
            idx = idx * d + n;
        }
        Ok(idx)
    }

    /// Inverse of [`ModeSpace::index`].
    pub fn occupations(&self, mut index: usize) -> Vec<usize> {
        let mut occ = vec![0; self.dims.len()];
        for (slot, &d) in self.dims.iter().enumerate().rev() {
            occ[slot] = index % d;
            index /= d;
        }
        occ
    }
}

impl fmt::Display for ModeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .labels
            .iter()
            .zip(&self.dims)
            .map(|(l, d)| format!("{l}:{d}"))
            .collect();
        write!(f, "({})", parts.join(" x "))
    }
}

/// Dense complex operator on a [`ModeSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct QOperator {
    space: ModeSpace,
    matrix: CMatrix,
}

impl QOperator {
    pub fn new(space: ModeSpace, matrix: CMatrix) -> Result<Self> {
        let n = space.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn identity(space: &ModeSpace) -> Self {
        let n = space.total_dim();
        Self {
            space: space.clone(),
            matrix: CMatrix::identity(n, n),
        }
    }

    pub fn zeros(space: &ModeSpace) -> Self {
        let n = space.total_dim();
        Self {
            space: space.clone(),
            matrix: CMatrix::zeros(n, n),
        }
    }

    /// Diagonal operator from a function of the flat basis index.
    pub fn diagonal(space: &ModeSpace, f: impl Fn(&[usize]) -> C64) -> Self {
        let n = space.total_dim();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = f(&space.occupations(i));
        }
        Self {
            space: space.clone(),
            matrix: m,
        }
    }

    /// `|ket><bra|` between two product basis states.
    pub fn outer(space: &ModeSpace, ket: &[usize], bra: &[usize]) -> Result<Self> {
        let mut op = Self::zeros(space);
        op.matrix[(space.index(ket)?, space.index(bra)?)] = c(1.0);
        Ok(op)
    }

    pub fn space(&self) -> &ModeSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Same matrix on a different space of equal dimensions (e.g. to move a
    /// generic `"mode"` operator onto a labeled resonator space).
    pub fn on_space(&self, space: &ModeSpace) -> Result<Self> {
        if space.dims() != self.space.dims() {
            return Err(Error::DimensionMismatch {
                expected: space.total_dim(),
                found: self.dim(),
            });
        }
        Ok(Self {
            space: space.clone(),
            matrix: self.matrix.clone(),
        })
    }

    pub fn dagger(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: &self.matrix * s,
        }
    }

    pub fn element(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &QOperator) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        max_abs(&(&self.matrix - self.matrix.adjoint())) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let n = self.dim();
        max_abs(&(self.matrix.adjoint() * &self.matrix - CMatrix::identity(n, n))) <= tol
    }

    pub fn checked_mul(&self, rhs: &QOperator) -> Result<QOperator> {
        self.same_space(rhs)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix * &rhs.matrix,
        })
    }

    pub fn checked_add(&self, rhs: &QOperator) -> Result<QOperator> {
        self.same_space(rhs)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix + &rhs.matrix,
        })
    }

    /// Real eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Applies the operator to a state vector.
    pub fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }

    fn same_space(&self, other: &QOperator) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

impl Add for &QOperator {
    type Output = QOperator;
    fn add(self, rhs: &QOperator) -> QOperator {
        self.checked_add(rhs)
            .expect("operator addition across spaces")
    }
}

impl Sub for &QOperator {
    type Output = QOperator;
    fn sub(self, rhs: &QOperator) -> QOperator {
        assert_eq!(self.space, rhs.space, "operator subtraction across spaces");
        QOperator {
            space: self.space.clone(),
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl Mul for &QOperator {
    type Output = QOperator;
    fn mul(self, rhs: &QOperator) -> QOperator {
        self.checked_mul(rhs)
            .expect("operator product across spaces")
    }
}

impl Mul<C64> for &QOperator {
    type Output = QOperator;
    fn mul(self, rhs: C64) -> QOperator {
        self.scale(rhs)
    }
}

impl Mul<f64> for &QOperator {
    type Output = QOperator;
    fn mul(self, rhs: f64) -> QOperator {
        self.scale(c(rhs))
    }
}

impl Neg for &QOperator {
    type Output = QOperator;
    fn neg(self) -> QOperator {
        self.scale(c(-1.0))
    }
}

/// Annihilation operator on a single mode of dimension `dim`.
pub fn destroy(dim: usize) -> Result<QOperator> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, min: 2 });
    }
    let space = ModeSpace::single("mode", dim)?;
    let mut m = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = c((n as f64).sqrt());
    }
    QOperator::new(space, m)
}

pub fn create(dim: usize) -> Result<QOperator> {
    Ok(destroy(dim)?.dagger())
}

pub fn number(dim: usize) -> Result<QOperator> {
    let space = ModeSpace::single("mode", dim)?;
    Ok(QOperator::diagonal(&space, |occ| c(occ[0] as f64)))
}

pub fn identity(dim: usize) -> Result<QOperator> {
    Ok(QOperator::identity(&ModeSpace::single("mode", dim)?))
}

/// Single-mode projector `|level><level|`.
pub fn projector(dim: usize, level: usize) -> Result<QOperator> {
    let space = ModeSpace::single("mode", dim)?;
    QOperator::outer(&space, &[level], &[level])
}

/// Photon-number parity `diag((-1)^n)`.
pub fn parity(dim: usize) -> QOperator {
    assert!(dim >= 1, "parity needs at least one level");
    let mut m = CMatrix::zeros(dim, dim);
    for n in 0..dim {
        m[(n, n)] = c(if n % 2 == 0 { 1.0 } else { -1.0 });
    }
    QOperator {
        space: ModeSpace::single_unchecked("mode", dim),
        matrix: m,
    }
}

/// Lifts a single-mode operator into `space` at `slot`, with identities on
/// every other mode.
pub fn embed(op: &QOperator, space: &ModeSpace, slot: &str) -> Result<QOperator> {
    let k = space.slot(slot)?;
    if op.space.num_modes() != 1 {
        return Err(Error::SpaceMismatch);
    }
    if op.dim() != space.dims()[k] {
        return Err(Error::DimensionMismatch {
            expected: space.dims()[k],
            found: op.dim(),
        });
    }
    let mut m = CMatrix::from_element(1, 1, c(1.0));
    for (i, &d) in space.dims().iter().enumerate() {
        let factor = if i == k {
            op.matrix.clone()
        } else {
            CMatrix::identity(d, d)
        };
        m = m.kronecker(&factor);
    }
    QOperator::new(space.clone(), m)
}

pub fn commutator(a: &QOperator, b: &QOperator) -> Result<QOperator> {
    let ab = a.checked_mul(b)?;
    let ba = b.checked_mul(a)?;
    Ok(&ab - &ba)
}

/// Eigen-factorization of the Hermitian generator `i(a^dag - a)`, from which
/// every displacement of the same dimension follows by a phase rotation:
/// `D(r e^{i theta}) = R V exp(-i r L) V^dag R^dag`, `R = exp(i theta n)`.
#[derive(Clone, Debug)]
pub struct DisplacementFactory {
    dim: usize,
    eigvecs: CMatrix,
    eigvals: Vec<f64>,
}

impl DisplacementFactory {
    pub fn new(dim: usize) -> Result<Self> {
        let a = destroy(dim)?;
        let gen = (&a.dagger() - &a).scale(C64::i());
        let eig = gen.matrix.symmetric_eigen();
        Ok(Self {
            dim,
            eigvecs: eig.eigenvectors,
            eigvals: eig.eigenvalues.iter().copied().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn eigvecs(&self) -> &CMatrix {
        &self.eigvecs
    }

    pub(crate) fn eigvals(&self) -> &[f64] {
        &self.eigvals
    }

    /// `exp(beta a^dag - beta^* a)` without the truncation guard.
    pub fn matrix(&self, beta: C64) -> CMatrix {
        let (r, theta) = beta.to_polar();
        let n = self.dim;
        // U = R V
        let mut u = self.eigvecs.clone();
        for row in 0..n {
            let ph = C64::from_polar(1.0, theta * row as f64);
            for col in 0..n {
                u[(row, col)] *= ph;
            }
        }
        let mut ue = u.clone();
        for col in 0..n {
            let e = C64::from_polar(1.0, -r * self.eigvals[col]);
            for row in 0..n {
                ue[(row, col)] *= e;
            }
        }
        ue * u.adjoint()
    }
}

/// Truncation guard for displacements: `|beta|^2 <= dim / 4`.
pub fn displacement_guard(dim: usize, beta: C64) -> Result<()> {
    let beta_sq = beta.norm_sqr();
    let limit = dim as f64 / 4.0;
    if beta_sq > limit {
        return Err(Error::TruncationRisk { beta_sq, limit });
    }
    Ok(())
}

/// Displacement operator `D(beta)` on a single mode of dimension `dim`.
pub fn displacement(dim: usize, beta: C64) -> Result<QOperator> {
    displacement_with(dim, beta, false)
}

/// Like [`displacement`], but `allow_truncation` skips the guard.
pub fn displacement_with(dim: usize, beta: C64, allow_truncation: bool) -> Result<QOperator> {
    if !allow_truncation {
        displacement_guard(dim, beta)?;
    }
    let f = DisplacementFactory::new(dim)?;
    QOperator::new(ModeSpace::single("mode", dim)?, f.matrix(beta))
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Pure(CVector),
    Mixed(CMatrix),
}

/// Pure or mixed quantum state on a [`ModeSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct QState {
    space: ModeSpace,
    repr: Repr,
}

const PURE_NORM_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-10;
const EIGEN_TOL: f64 = 1e-9;

impl QState {
    pub fn pure(space: ModeSpace, v: CVector) -> Result<Self> {
        if v.len() != space.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.total_dim(),
                found: v.len(),
            });
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > PURE_NORM_TOL {
            return Err(Error::InvalidState(format!("vector norm {norm} is not 1")));
        }
        Ok(Self {
            space,
            repr: Repr::Pure(v),
        })
    }

    /// Normalizes `v` before wrapping it.
    pub fn pure_normalized(space: ModeSpace, v: CVector) -> Result<Self> {
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::pure(space, v / c(norm))
    }

    pub fn fock(space: &ModeSpace, occupations: &[usize]) -> Result<Self> {
        let mut v = CVector::zeros(space.total_dim());
        v[space.index(occupations)?] = c(1.0);
        Self::pure(space.clone(), v)
    }

    /// Validated density matrix.
    pub fn density(space: ModeSpace, rho: CMatrix) -> Result<Self> {
        let n = space.total_dim();
        if rho.nrows() != n || rho.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rho.nrows(),
            });
        }
        let herm = max_abs(&(&rho - rho.adjoint()));
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (defect {herm:.3e})"
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min_ev = min_hermitian_eigenvalue(&rho);
        if min_ev < -EIGEN_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_ev:.3e}"
            )));
        }
        Ok(Self {
            space,
            repr: Repr::Mixed(rho),
        })
    }

    /// Wraps an integrator output without re-validating it.
    pub(crate) fn density_unchecked(space: ModeSpace, rho: CMatrix) -> Self {
        Self {
            space,
            repr: Repr::Mixed(rho),
        }
    }

    pub fn maximally_mixed(space: &ModeSpace) -> Self {
        let n = space.total_dim();
        Self::density_unchecked(space.clone(), CMatrix::identity(n, n) / c(n as f64))
    }

    pub fn space(&self) -> &ModeSpace {
        &self.space
    }

    pub fn is_pure_repr(&self) -> bool {
        matches!(self.repr, Repr::Pure(_))
    }

    pub fn vector(&self) -> Option<&CVector> {
        match &self.repr {
            Repr::Pure(v) => Some(v),
            Repr::Mixed(_) => None,
        }
    }

    pub fn density_matrix(&self) -> CMatrix {
        match &self.repr {
            Repr::Pure(v) => v * v.adjoint(),
            Repr::Mixed(m) => m.clone(),
        }
    }

    pub fn to_mixed(&self) -> QState {
        Self::density_unchecked(self.space.clone(), self.density_matrix())
    }

    pub fn trace(&self) -> f64 {
        match &self.repr {
            Repr::Pure(v) => v.norm_squared(),
            Repr::Mixed(m) => m.trace().re,
        }
    }

    pub fn purity(&self) -> f64 {
        match &self.repr {
            Repr::Pure(v) => v.norm_squared().powi(2),
            Repr::Mixed(m) => m.iter().map(|z| z.norm_sqr()).sum(),
        }
    }

    /// `tr(O rho)`.
    pub fn expect(&self, op: &QOperator) -> Result<C64> {
        if op.space() != &self.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(match &self.repr {
            Repr::Pure(v) => v.dotc(&(op.matrix() * v)),
            Repr::Mixed(m) => trace_of_product(op.matrix(), m),
        })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match &self.repr {
            Repr::Pure(_) => 0.0,
            Repr::Mixed(m) => min_hermitian_eigenvalue(m),
        }
    }

    pub fn hermiticity_defect(&self) -> f64 {
        match &self.repr {
            Repr::Pure(_) => 0.0,
            Repr::Mixed(m) => max_abs(&(m - m.adjoint())),
        }
    }

    /// Reduced state of the mode `keep` (all other modes traced out).
    pub fn partial_trace(&self, keep: &str) -> Result<QState> {
        let k = self.space.slot(keep)?;
        let dk = self.space.dims()[k];
        let rho = self.density_matrix();
        let n = self.space.total_dim();
        let mut out = CMatrix::zeros(dk, dk);
        // Sum over matching occupations of the traced modes.
        let occ: Vec<Vec<usize>> = (0..n).map(|i| self.space.occupations(i)).collect();
        for i in 0..n {
            for j in 0..n {
                let same_rest = occ[i]
                    .iter()
                    .zip(&occ[j])
                    .enumerate()
                    .all(|(s, (x, y))| s == k || x == y);
                if same_rest {
                    out[(occ[i][k], occ[j][k])] += rho[(i, j)];
                }
            }
        }
        Ok(Self::density_unchecked(ModeSpace::single(keep, dk)?, out))
    }

    /// Populations of each level of mode `label`.
    pub fn populations(&self, label: &str) -> Result<Vec<f64>> {
        let reduced = self.partial_trace(label)?;
        let m = reduced.density_matrix();
        Ok((0..m.nrows()).map(|i| m[(i, i)].re).collect())
    }
}

pub(crate) fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub(crate) fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    let h = (m + m.adjoint()) * c(0.5);
    h.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn destroy_two_level() {
        let a = destroy(2).unwrap();
        assert_eq!(a.element(0, 1), c(1.0));
        assert_eq!(a.element(0, 0), c(0.0));
        assert_eq!(a.element(1, 0), c(0.0));
        assert_eq!(a.element(1, 1), c(0.0));
    }

    #[test]
    fn destroy_rejects_small_dims() {
        assert!(matches!(destroy(1), Err(Error::InvalidDimension { .. })));
        assert!(destroy(0).is_err());
    }

    #[test]
    fn number_operator_is_diagonal() {
        let n = number(3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { c(i as f64) } else { c(0.0) };
                assert_eq!(n.element(i, j), expect);
            }
        }
    }

    #[test]
    fn canonical_commutator_below_edge() {
        let dim = 7;
        let a = destroy(dim).unwrap();
        let comm = commutator(&a, &a.dagger()).unwrap();
        for i in 0..dim - 1 {
            for j in 0..dim {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((comm.element(i, j) - c(expect)).norm() < 1e-14);
            }
        }
        // the truncation edge breaks it
        assert!((comm.element(dim - 1, dim - 1) - c(1.0 - dim as f64)).norm() < 1e-12);
    }

    #[test]
    fn embed_identity_and_commuting_modes() {
        let space = ModeSpace::resonator_transmon(12, 3).unwrap();
        let id3 = identity(3).unwrap();
        let e = embed(&id3, &space, TRANSMON).unwrap();
        assert!(e.max_abs_diff(&QOperator::identity(&space)) == 0.0);

        let a = embed(&destroy(12).unwrap(), &space, RESONATOR).unwrap();
        let b = embed(&destroy(3).unwrap(), &space, TRANSMON).unwrap();
        assert!((&a * &b).max_abs_diff(&(&b * &a)) < 1e-15);
    }

    #[test]
    fn embed_errors() {
        let space = ModeSpace::resonator_transmon(12, 3).unwrap();
        let a = destroy(4).unwrap();
        assert!(matches!(
            embed(&a, &space, RESONATOR),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(embed(&a, &space, "c"), Err(Error::UnknownMode(_))));
    }

    #[test]
    fn photon_number_of_g4() {
        let space = ModeSpace::resonator_transmon(12, 3).unwrap();
        let na = embed(&number(12).unwrap(), &space, RESONATOR).unwrap();
        let g4 = QState::fock(&space, &[4, 0]).unwrap().to_mixed();
        assert!(approx(g4.expect(&na).unwrap(), c(4.0), 1e-14));
    }

    #[test]
    fn displacement_zero_is_identity() {
        let d = displacement(12, C64::new(0.0, 0.0)).unwrap();
        assert!(d.max_abs_diff(&identity(12).unwrap()) < 1e-12);
    }

    #[test]
    fn coherent_state_overlap() {
        let d = displacement(20, c(1.0)).unwrap();
        assert!((d.element(0, 0).re - (-0.5_f64).exp()).abs() < 1e-8);
        assert!(d.element(0, 0).im.abs() < 1e-8);
    }

    #[test]
    fn displacement_inverse() {
        let beta = C64::new(0.7, 0.3);
        let d = displacement(12, beta).unwrap();
        let dm = displacement(12, -beta).unwrap();
        assert!((&d * &dm).max_abs_diff(&identity(12).unwrap()) < 1e-10);
        assert!(d.is_unitary(1e-10));
    }

    #[test]
    fn displacement_guard_trips() {
        let err = displacement(12, c(1.8)).unwrap_err();
        assert!(matches!(err, Error::TruncationRisk { .. }));
        assert!(displacement_with(12, c(1.8), true).is_ok());
    }

    #[test]
    fn displacement_matches_pade_exponential() {
        // independent route: nalgebra's scaling-and-squaring Pade exponential
        let dim = 16;
        let beta = C64::new(-0.9, 1.1);
        let a = destroy(dim).unwrap();
        let gen = &a.dagger().scale(beta) - &a.scale(beta.conj());
        let pade = gen.matrix().clone().exp();
        let ours = displacement(dim, beta).unwrap();
        assert!(max_abs(&(ours.matrix() - pade)) < 1e-10);
    }

    #[test]
    fn parity_values() {
        let p = parity(8);
        assert_eq!(p.element(4, 4), c(1.0));
        assert_eq!(p.element(1, 1), c(-1.0));
        let space = ModeSpace::single("mode", 8).unwrap();
        let mut v = CVector::zeros(8);
        v[0] = c(1.0);
        v[4] = c(1.0);
        let st = QState::pure_normalized(space, v).unwrap().to_mixed();
        assert!(approx(st.expect(&p).unwrap(), c(1.0), 1e-14));
        assert_eq!(parity(1).dim(), 1);
    }

    #[test]
    fn commutator_of_squares_on_vacuum() {
        let a = destroy(10).unwrap();
        let a2 = &a * &a;
        let comm = commutator(&a2, &a2.dagger()).unwrap();
        let mut vac = CVector::zeros(10);
        vac[0] = c(1.0);
        let out = comm.apply(&vac);
        assert!(approx(out[0], c(2.0), 1e-14));
        for i in 1..10 {
            assert!(out[i].norm() < 1e-14);
        }
        assert!(commutator(&a, &a).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn commutator_space_mismatch() {
        let a = destroy(3).unwrap();
        let b = destroy(4).unwrap();
        assert!(matches!(commutator(&a, &b), Err(Error::SpaceMismatch)));
    }

    #[test]
    fn density_validation() {
        let space = ModeSpace::single("mode", 3).unwrap();
        let mut m = CMatrix::zeros(3, 3);
        m[(0, 0)] = c(0.5);
        assert!(QState::density(space.clone(), m.clone()).is_err());
        m[(1, 1)] = c(0.5);
        assert!(QState::density(space.clone(), m.clone()).is_ok());
        m[(0, 0)] = c(1.5);
        m[(1, 1)] = c(-0.5);
        assert!(QState::density(space, m).is_err());
    }

    #[test]
    fn pure_state_norm_checked() {
        let space = ModeSpace::single("mode", 3).unwrap();
        let v = CVector::from_element(3, c(1.0));
        assert!(QState::pure(space.clone(), v.clone()).is_err());
        assert!(QState::pure_normalized(space, v).is_ok());
    }

    #[test]
    fn partial_trace_of_product_state() {
        let space = ModeSpace::resonator_transmon(4, 3).unwrap();
        let f0 = QState::fock(&space, &[0, 2]).unwrap();
        assert_eq!(f0.populations(RESONATOR).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(f0.populations(TRANSMON).unwrap(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn index_roundtrip() {
        let space = ModeSpace::resonator_transmon(12, 3).unwrap();
        assert_eq!(space.index(&[4, 0]).unwrap(), 12);
        assert_eq!(space.index(&[0, 2]).unwrap(), 2);
        for i in 0..36 {
            assert_eq!(space.index(&space.occupations(i)).unwrap(), i);
        }
    }

    #[test]
    fn mode_space_invariants() {
        assert!(ModeSpace::new(&[("a", 1)]).is_err());
        assert!(matches!(
            ModeSpace::new(&[("a", 3), ("a", 3)]),
            Err(Error::DuplicateMode(_))
        ));
        assert_eq!(
            ModeSpace::resonator_transmon(12, 3).unwrap().total_dim(),
            36
        );
    }
}
