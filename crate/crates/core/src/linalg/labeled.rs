use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// A named tensor factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Space {
    pub name: String,
    pub dim: usize,
}

impl Space {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Self {
            name: name.into(),
            dim,
        }
    }
}

/// Dense square complex matrix acting on a tensor product of labeled spaces.
///
/// The composite basis index is mixed-radix over the labels with the first
/// label most significant, so on `[Z, Y]` the index of `|z>|y>` is
/// `z * dim(Y) + y`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledOperator {
    labels: Vec<Space>,
    mat: CMatrix,
}

impl LabeledOperator {
    pub fn new(labels: Vec<Space>, mat: CMatrix) -> Result<Self> {
        check_unique(&labels)?;
        let n: usize = labels.iter().map(|s| s.dim).product();
        if mat.nrows() != mat.ncols() {
            return Err(Error::Shape(format!(
                "matrix is {}x{}, expected square",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.nrows() != n {
            return Err(Error::Shape(format!(
                "matrix dimension {} does not match label product {}",
                mat.nrows(),
                n
            )));
        }
        Ok(Self { labels, mat })
    }

    pub fn zeros(labels: Vec<Space>) -> Result<Self> {
        let n = labels.iter().map(|s| s.dim).product();
        Self::new(labels, CMatrix::zeros(n, n))
    }

    pub fn identity(labels: Vec<Space>) -> Result<Self> {
        let n = labels.iter().map(|s| s.dim).product();
        Self::new(labels, CMatrix::identity(n, n))
    }

    pub fn from_real_diagonal(labels: Vec<Space>, diag: &[f64]) -> Result<Self> {
        let n: usize = labels.iter().map(|s| s.dim).product();
        if diag.len() != n {
            return Err(Error::Shape(format!(
                "diagonal has {} entries, expected {}",
                diag.len(),
                n
            )));
        }
        let mut mat = CMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            mat[(i, i)] = Complex64::new(d, 0.0);
        }
        Self::new(labels, mat)
    }

    pub fn labels(&self) -> &[Space] {
        &self.labels
    }

    pub fn label_names(&self) -> Vec<&str> {
        self.labels.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|s| s.name == label)
    }

    pub fn space(&self, label: &str) -> Result<&Space> {
        self.labels
            .iter()
            .find(|s| s.name == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Same matrix with new entries; labels are kept.
    pub fn with_matrix(&self, mat: CMatrix) -> Result<Self> {
        Self::new(self.labels.clone(), mat)
    }

    pub fn map_matrix(&self, f: impl FnOnce(&CMatrix) -> CMatrix) -> Self {
        Self {
            labels: self.labels.clone(),
            mat: f(&self.mat),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_matrix(|m| m * Complex64::new(s, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        self.map_matrix(|m| m.adjoint())
    }

    pub fn hermitian_part(&self) -> Self {
        self.map_matrix(|m| (m + m.adjoint()) * Complex64::new(0.5, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim()).map(|i| self.mat[(i, i)]).collect()
    }

    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).collect()
    }

    /// Frobenius norm of the off-diagonal part.
    pub fn off_diagonal_norm(&self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc += self.mat[(i, j)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.off_diagonal_norm() <= tol
    }

    pub fn same_labels(&self, other: &Self) -> bool {
        self.labels == other.labels
    }

    /// True when both operators carry the same set of labels (in any order).
    pub fn same_label_set(&self, other: &Self) -> bool {
        self.labels.len() == other.labels.len()
            && self.labels.iter().all(|s| other.labels.contains(s))
    }

    /// Permute the tensor factors into the given label order.
    pub fn reorder(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.labels.len() {
            return Err(Error::Shape(format!(
                "reorder to {:?} from {:?}",
                order,
                self.label_names()
            )));
        }
        let mut perm = Vec::with_capacity(order.len());
        for name in order {
            let p = self
                .position(name)
                .ok_or_else(|| Error::UnknownLabel(name.to_string()))?;
            if perm.contains(&p) {
                return Err(Error::LabelCollision(name.to_string()));
            }
            perm.push(p);
        }
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(self.clone());
        }
        let new_labels: Vec<Space> = perm.iter().map(|&p| self.labels[p].clone()).collect();
        let old_dims: Vec<usize> = self.labels.iter().map(|s| s.dim).collect();
        let old_strides = strides(&old_dims);
        let new_dims: Vec<usize> = new_labels.iter().map(|s| s.dim).collect();
        let n = self.dim();
        let index_map: Vec<usize> = (0..n)
            .map(|new_idx| {
                let digits = to_digits(new_idx, &new_dims);
                digits
                    .iter()
                    .zip(&perm)
                    .map(|(&d, &p)| d * old_strides[p])
                    .sum()
            })
            .collect();
        let mat = CMatrix::from_fn(n, n, |i, j| self.mat[(index_map[i], index_map[j])]);
        Self::new(new_labels, mat)
    }

    /// Reorder to match the label order of `other` (which must carry the same labels).
    pub fn aligned_to(&self, other: &Self) -> Result<Self> {
        if !self.same_label_set(other) {
            return Err(Error::Shape(format!(
                "labels {:?} vs {:?}",
                self.label_names(),
                other.label_names()
            )));
        }
        self.reorder(&other.label_names())
    }

    /// Rename one label, keeping its dimension and position.
    pub fn relabel(&self, from: &str, to: &str) -> Result<Self> {
        let p = self
            .position(from)
            .ok_or_else(|| Error::UnknownLabel(from.to_string()))?;
        let mut labels = self.labels.clone();
        labels[p].name = to.to_string();
        Self::new(labels, self.mat.clone())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let o = other.aligned_to(self)?;
        Ok(self.map_matrix(|m| m + &o.mat))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let o = other.aligned_to(self)?;
        Ok(self.map_matrix(|m| m - &o.mat))
    }

    /// Operator product `self * other`, after aligning `other` to `self`'s label order.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        let o = other.aligned_to(self)?;
        Ok(self.map_matrix(|m| m * &o.mat))
    }

    /// Hilbert-Schmidt inner product `Tr(self^H other)`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        let o = other.aligned_to(self)?;
        Ok(self
            .mat
            .iter()
            .zip(o.mat.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|A - A^H|_F`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.mat[(i, j)] - self.mat[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn hermitian_check(&self, tol: f64) -> HermitianCheck {
        let max_asymmetry = self.asymmetry();
        HermitianCheck {
            max_asymmetry,
            is_hermitian: max_asymmetry <= tol,
        }
    }
}

/// Result of a Hermiticity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermitianCheck {
    pub max_asymmetry: f64,
    pub is_hermitian: bool,
}

/// Row-major rows of `[re, im]` pairs.
pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

/// Inverse of [`matrix_to_rows`]; rejects ragged or non-square input.
pub fn rows_to_matrix(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::Shape(format!(
            "row of length {} in a matrix with {} rows",
            bad.len(),
            n
        )));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    labels: Vec<Space>,
    entries: Vec<Vec<[f64; 2]>>,
}

impl Serialize for LabeledOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorRepr {
            labels: self.labels.clone(),
            entries: matrix_to_rows(&self.mat),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LabeledOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = OperatorRepr::deserialize(deserializer)?;
        let mat = rows_to_matrix(&repr.entries).map_err(de::Error::custom)?;
        LabeledOperator::new(repr.labels, mat).map_err(de::Error::custom)
    }
}

fn check_unique(labels: &[Space]) -> Result<()> {
    for (i, s) in labels.iter().enumerate() {
        if labels[..i].iter().any(|t| t.name == s.name) {
            return Err(Error::LabelCollision(s.name.clone()));
        }
    }
    Ok(())
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut out = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        out[i] = out[i + 1] * dims[i + 1];
    }
    out
}

pub(crate) fn to_digits(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for i in (0..dims.len()).rev() {
        digits[i] = idx % dims[i];
        idx /= dims[i];
    }
    digits
}

/// Kronecker product with concatenated labels `[a.labels, b.labels]`.
pub fn tensor(a: &LabeledOperator, b: &LabeledOperator) -> Result<LabeledOperator> {
    let mut labels = a.labels.clone();
    labels.extend(b.labels.iter().cloned());
    check_unique(&labels)?;
    LabeledOperator::new(labels, a.mat.kronecker(&b.mat))
}

/// Contract the factor named `label`.
pub fn partial_trace(m: &LabeledOperator, label: &str) -> Result<LabeledOperator> {
    let p = m
        .position(label)
        .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
    let dims: Vec<usize> = m.labels.iter().map(|s| s.dim).collect();
    let d = dims[p];
    let low: usize = dims[p + 1..].iter().product();
    let n_out = m.dim() / d;
    let expand = |r: usize, k: usize| {
        let hi = r / low;
        let lo = r % low;
        hi * d * low + k * low + lo
    };
    let mat = CMatrix::from_fn(n_out, n_out, |r, c| {
        (0..d).map(|k| m.mat[(expand(r, k), expand(c, k))]).sum()
    });
    let mut labels = m.labels.clone();
    labels.remove(p);
    LabeledOperator::new(labels, mat)
}

/// Place an identity on `space` into the slot `position` of `m`'s label order.
pub fn lift_identity(
    m: &LabeledOperator,
    space: &Space,
    position: usize,
) -> Result<LabeledOperator> {
    let id = LabeledOperator::identity(vec![space.clone()])?;
    let t = tensor(&id, m)?;
    let mut order: Vec<&str> = m.label_names();
    if position > order.len() {
        return Err(Error::Shape(format!("slot {position} out of range")));
    }
    order.insert(position, space.name.as_str());
    t.reorder(&order)
}
