//! Dense complex linear algebra for the small Hilbert spaces used by the
//! scenarios: kets, tensor products, rank-1 projectors and the handful of
//! predicates (certainty, exclusivity, resolution of the identity) that the
//! inference and assignment engines are built on.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

pub type Amplitude = Complex64;

/// Normalization tolerance for internally constructed objects.
pub const TOL_NORM: f64 = 1e-12;
/// Default tolerance for checks against user-supplied scenario data.
pub const TOL_CHECK: f64 = 1e-9;

/// Residual norm below which a set of states is treated as linearly dependent.
const RANK_TOL: f64 = 1e-9;
/// Magnitude below which a coordinate counts as zero during phase canonicalization.
const PHASE_ZERO: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("amplitude {index} is not finite")]
    NonFinite { index: usize },
    #[error("state norm {norm} differs from 1 by more than {tol}")]
    NotNormalized { norm: f64, tol: f64 },
    #[error("cannot normalize the zero vector")]
    ZeroVector,
    #[error("operator is not a Hermitian idempotent")]
    NotAProjector,
    #[error("operator list is empty")]
    Empty,
    #[error("expected {expected} states, got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("degenerate configuration: input states have rank {rank}, need {needed}")]
    Degenerate { rank: usize, needed: usize },
}

pub type Result<T> = std::result::Result<T, HilbertError>;

/// Outcome of a yes/no proposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub fn as_u8(self) -> u8 {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// A unit vector in a finite-dimensional complex Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Amplitude>,
}

impl StateVector {
    /// Wraps `amps`, requiring unit norm within [`TOL_NORM`].
    pub fn new(amps: Vec<Amplitude>) -> Result<Self> {
        Self::with_tolerance(amps, TOL_NORM)
    }

    /// Wraps `amps`, requiring unit norm within `tol`. The amplitudes are
    /// kept exactly as given.
    pub fn with_tolerance(amps: Vec<Amplitude>, tol: f64) -> Result<Self> {
        check_raw(&amps)?;
        let n = norm(&amps);
        if (n - 1.0).abs() > tol {
            return Err(HilbertError::NotNormalized { norm: n, tol });
        }
        Ok(Self { amps })
    }

    /// Scales a nonzero raw vector to unit norm.
    pub fn normalized(amps: Vec<Amplitude>) -> Result<Self> {
        check_raw(&amps)?;
        let n = norm(&amps);
        if n == 0.0 {
            return Err(HilbertError::ZeroVector);
        }
        Ok(Self {
            amps: amps.into_iter().map(|a| a / n).collect(),
        })
    }

    pub fn from_real(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| Amplitude::new(x, 0.0)).collect())
    }

    /// The `index`-th computational basis vector.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(dim >= 2 && index < dim, "basis({dim}, {index}) out of range");
        let mut amps = vec![Amplitude::new(0.0, 0.0); dim];
        amps[index] = Amplitude::new(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<Amplitude> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    /// The same ray with the first nonzero coordinate made real and positive.
    pub fn canonical(&self) -> Self {
        Self {
            amps: canonicalize_phase(self.amps.clone()),
        }
    }
}

fn check_raw(amps: &[Amplitude]) -> Result<()> {
    if amps.len() < 2 {
        return Err(HilbertError::DimensionTooSmall(amps.len()));
    }
    if let Some(index) = amps.iter().position(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(HilbertError::NonFinite { index });
    }
    Ok(())
}

/// Euclidean norm of a raw amplitude vector.
pub fn norm(v: &[Amplitude]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// ⟨u|v⟩ on raw vectors, conjugate-linear in `u`. Caller guarantees equal length.
pub fn vdot(u: &[Amplitude], v: &[Amplitude]) -> Amplitude {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Kronecker product of raw vectors: `out[i * v.len() + j] = u[i] * v[j]`.
pub fn kron(u: &[Amplitude], v: &[Amplitude]) -> Vec<Amplitude> {
    u.iter().flat_map(|&a| v.iter().map(move |&b| a * b)).collect()
}

pub fn tensor(u: &StateVector, v: &StateVector) -> StateVector {
    StateVector {
        amps: kron(&u.amps, &v.amps),
    }
}

pub fn inner(u: &StateVector, v: &StateVector) -> Result<Amplitude> {
    same_dim(u.dim(), v.dim())?;
    Ok(vdot(&u.amps, &v.amps))
}

/// True when `u` and `v` are the same ray, i.e. equal up to a global phase.
pub fn same_ray(u: &StateVector, v: &StateVector, tol: f64) -> bool {
    u.dim() == v.dim() && (vdot(&u.amps, &v.amps).norm() - 1.0).abs() < tol
}

fn same_dim(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(HilbertError::DimensionMismatch { left, right });
    }
    Ok(())
}

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    entries: Vec<Amplitude>,
}

impl Operator {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Amplitude::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zero(dim);
        for i in 0..dim {
            op.entries[i * dim + i] = Amplitude::new(1.0, 0.0);
        }
        op
    }

    /// Builds an operator from rows; panics if the rows are not square.
    pub fn from_rows(rows: &[Vec<Amplitude>]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "operator rows must be square");
        Self {
            dim,
            entries: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Amplitude {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Amplitude] {
        &self.entries
    }

    pub fn mul(&self, other: &Operator) -> Result<Operator> {
        same_dim(self.dim, other.dim)?;
        let n = self.dim;
        let mut out = Operator::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == Amplitude::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        same_dim(self.dim, other.dim)?;
        Ok(Operator {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        same_dim(self.dim, other.dim)?;
        Ok(Operator {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn trace(&self) -> Amplitude {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.entries)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim;
        (0..n).all(|i| (i..n).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() < tol))
    }

    pub fn is_idempotent(&self, tol: f64) -> bool {
        match self.mul(self).and_then(|sq| sq.sub(self)) {
            Ok(diff) => diff.max_abs_entry() < tol,
            Err(_) => false,
        }
    }

    fn check_projector(&self, tol: f64) -> Result<()> {
        if self.is_hermitian(tol) && self.is_idempotent(tol) {
            Ok(())
        } else {
            Err(HilbertError::NotAProjector)
        }
    }
}

/// |u⟩⟨u| / ⟨u|u⟩. Dividing by the squared norm keeps the result idempotent
/// even for states loaded with a looser normalization tolerance.
pub fn projector(u: &StateVector) -> Operator {
    let n = u.dim();
    let scale = 1.0 / u.amps.iter().map(|a| a.norm_sqr()).sum::<f64>();
    let mut entries = Vec::with_capacity(n * n);
    for a in &u.amps {
        for b in &u.amps {
            entries.push(a * b.conj() * scale);
        }
    }
    Operator { dim: n, entries }
}

/// Matrix-vector product; the result is not renormalized.
pub fn apply(op: &Operator, v: &StateVector) -> Result<Vec<Amplitude>> {
    same_dim(op.dim, v.dim())?;
    let n = op.dim;
    Ok((0..n)
        .map(|i| vdot_plain(&op.entries[i * n..(i + 1) * n], &v.amps))
        .collect())
}

fn vdot_plain(row: &[Amplitude], v: &[Amplitude]) -> Amplitude {
    row.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// The outcome of measuring projector `op` on `state` if it is certain:
/// `Zero` when `‖P s‖ < tol`, `One` when `‖P s − s‖ < tol`, otherwise `None`.
pub fn certain_value(op: &Operator, state: &StateVector, tol: f64) -> Result<Option<Bit>> {
    same_dim(op.dim, state.dim())?;
    op.check_projector(tol.max(TOL_NORM))?;
    let image = apply(op, state)?;
    if norm(&image) < tol {
        return Ok(Some(Bit::Zero));
    }
    let residual: Vec<Amplitude> = image.iter().zip(&state.amps).map(|(p, s)| p - s).collect();
    if norm(&residual) < tol {
        return Ok(Some(Bit::One));
    }
    Ok(None)
}

/// True when `P·Q` vanishes entrywise within `tol`.
pub fn are_exclusive(p: &Operator, q: &Operator, tol: f64) -> Result<bool> {
    Ok(p.mul(q)?.max_abs_entry() < tol)
}

/// Largest entry of `ΣP − I` in magnitude.
pub fn identity_deviation(ops: &[Operator]) -> Result<f64> {
    Ok(sum_minus_identity(ops)?.max_abs_entry())
}

/// `ΣP − I`.
pub fn sum_minus_identity(ops: &[Operator]) -> Result<Operator> {
    let first = ops.first().ok_or(HilbertError::Empty)?;
    let mut sum = Operator::zero(first.dim);
    for op in ops {
        sum = sum.add(op)?;
    }
    sum.sub(&Operator::identity(first.dim))
}

/// The operators sum to the identity and are pairwise exclusive, both within `tol`.
pub fn is_resolution_of_identity(ops: &[Operator], tol: f64) -> Result<bool> {
    if identity_deviation(ops)? >= tol {
        return Ok(false);
    }
    for (i, p) in ops.iter().enumerate() {
        for q in &ops[i + 1..] {
            if !are_exclusive(p, q, tol)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The unique (up to phase) unit vector orthogonal to `dim − 1` linearly
/// independent states, with its first nonzero coordinate real and positive.
pub fn orthocomplement_state(states: &[StateVector]) -> Result<StateVector> {
    let dim = states.first().ok_or(HilbertError::Empty)?.dim();
    if states.len() != dim - 1 {
        return Err(HilbertError::WrongCount {
            expected: dim - 1,
            got: states.len(),
        });
    }
    let mut basis: Vec<Vec<Amplitude>> = Vec::with_capacity(dim - 1);
    for s in states {
        same_dim(dim, s.dim())?;
        let r = orthogonalize(s.amps.clone(), &basis);
        let n = norm(&r);
        if n < RANK_TOL {
            return Err(HilbertError::Degenerate {
                rank: basis.len(),
                needed: dim - 1,
            });
        }
        basis.push(r.into_iter().map(|a| a / n).collect());
    }

    // Project each coordinate axis off the span and keep the largest residual.
    let (best, n) = (0..dim)
        .map(|i| {
            let r = orthogonalize(StateVector::basis(dim, i).amps, &basis);
            let n = norm(&r);
            (r, n)
        })
        .fold((Vec::new(), -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    let amps = best.into_iter().map(|a| a / n).collect();
    Ok(StateVector {
        amps: canonicalize_phase(amps),
    })
}

// Modified Gram-Schmidt with one reorthogonalization pass.
fn orthogonalize(mut v: Vec<Amplitude>, basis: &[Vec<Amplitude>]) -> Vec<Amplitude> {
    for _ in 0..2 {
        for b in basis {
            let c = vdot(b, &v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
    v
}

/// Rotates the global phase so the first coordinate above a small cutoff is
/// real and positive.
pub fn canonicalize_phase(mut amps: Vec<Amplitude>) -> Vec<Amplitude> {
    if let Some(k) = amps.iter().position(|a| a.norm() > PHASE_ZERO) {
        let lead = amps[k];
        let phase = lead.conj() / lead.norm();
        for a in amps.iter_mut() {
            *a *= phase;
        }
        amps[k] = Amplitude::new(lead.norm(), 0.0);
    }
    amps
}
