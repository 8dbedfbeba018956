//! Eigen-analysis of Hermitian generators: distinct eigenvalues with
//! multiplicities, an eigenbasis, and eigen-subspace projectors.

use crate::matrix::{check_hermitian, CMat, ONE, ZERO};
use crate::{Error, Result};

/// Relative clustering tolerance for merging numerically equal eigenvalues.
pub const CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Distinct eigenvalues (cluster means), ascending.
    pub distinct_eigenvalues: Vec<f64>,
    pub multiplicities: Vec<usize>,
    /// Unitary whose columns are eigenvectors (ascending eigenvalue order).
    pub eigenbasis: CMat,
    /// Cluster index of each eigenbasis column.
    pub projector_index: Vec<usize>,
}

impl SpectrumReport {
    pub fn dim(&self) -> usize {
        self.eigenbasis.nrows()
    }

    pub fn n_distinct(&self) -> usize {
        self.distinct_eigenvalues.len()
    }

    /// `Σ_n λ_n P_n` rebuilt from the report.
    pub fn reconstruct(&self) -> CMat {
        let dim = self.dim();
        let mut scaled = self.eigenbasis.clone();
        for (col, &cluster) in self.projector_index.iter().enumerate() {
            let lambda = self.distinct_eigenvalues[cluster];
            for r in 0..dim {
                scaled[(r, col)] *= lambda;
            }
        }
        &scaled * self.eigenbasis.adjoint()
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_radius(&self) -> f64 {
        self.distinct_eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max)
    }
}

/// Diagonalizes a Hermitian matrix and clusters its eigenvalues.
///
/// Clustering merges eigenvalues within `1e−8·max(1, max|λ|)` of their
/// neighbour; a cluster whose diameter exceeds that tolerance means two
/// clusterings disagree and is reported as a numerical failure.
pub fn eigendecompose(g: &CMat) -> Result<SpectrumReport> {
    check_hermitian(g)?;
    let dim = g.nrows();
    let (values, basis) = crate::matrix::hermitian_eigen(g)?;

    let scale = values.iter().map(|v| v.abs()).fold(1.0_f64, f64::max);
    let tol = CLUSTER_TOL * scale;
    let mut distinct = Vec::new();
    let mut mult = Vec::new();
    let mut index = vec![0usize; dim];
    let mut start = 0;
    for i in 0..dim {
        let is_last = i == dim - 1;
        let splits = !is_last && values[i + 1] - values[i] >= tol;
        if is_last || splits {
            let members = &values[start..=i];
            let diameter = members.last().unwrap() - members.first().unwrap();
            if diameter >= tol {
                return Err(Error::Numerical(format!(
                    "eigenvalue clustering ambiguous: chain diameter {diameter:.3e} \
                     exceeds tolerance {tol:.3e}"
                )));
            }
            let mean = members.iter().sum::<f64>() / members.len() as f64;
            for slot in index.iter_mut().take(i + 1).skip(start) {
                *slot = distinct.len();
            }
            distinct.push(mean);
            mult.push(members.len());
            start = i + 1;
        }
    }

    Ok(SpectrumReport {
        distinct_eigenvalues: distinct,
        multiplicities: mult,
        eigenbasis: basis,
        projector_index: index,
    })
}

/// Orthogonal projector onto the `n`-th eigen-subspace.
pub fn subspace_projector(report: &SpectrumReport, n: usize) -> Result<CMat> {
    if n >= report.n_distinct() {
        return Err(Error::Invalid(format!(
            "cluster index {n} out of range ({} clusters)",
            report.n_distinct()
        )));
    }
    let dim = report.dim();
    let mut p = CMat::zeros(dim, dim);
    for (col, &cluster) in report.projector_index.iter().enumerate() {
        if cluster == n {
            let v = report.eigenbasis.column(col);
            for r in 0..dim {
                for c in 0..dim {
                    p[(r, c)] += v[r] * v[c].conj();
                }
            }
        }
    }
    Ok(p)
}

/// Spectrum classes that select the applicable closed-form shift rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumClass {
    /// `{±λ}`
    TwoSymmetric(f64),
    /// two arbitrary eigenvalues
    TwoGeneral,
    /// `{0, ±λ}`
    ThreeSymmetric(f64),
    /// anything else, carrying the distinct-eigenvalue count
    General(usize),
}

pub fn classify_spectrum(report: &SpectrumReport) -> SpectrumClass {
    let vals = &report.distinct_eigenvalues;
    let scale = report.spectral_radius().max(1.0);
    let tol = CLUSTER_TOL * scale;
    match vals.len() {
        2 => {
            if (vals[0] + vals[1]).abs() < tol {
                SpectrumClass::TwoSymmetric(vals[1])
            } else {
                SpectrumClass::TwoGeneral
            }
        }
        3 => {
            if vals[1].abs() < tol && (vals[0] + vals[2]).abs() < tol {
                SpectrumClass::ThreeSymmetric(vals[2])
            } else {
                SpectrumClass::General(3)
            }
        }
        l => SpectrumClass::General(l),
    }
}

/// Convenience: identity-projector completeness check used in tests.
pub fn projector_completeness(report: &SpectrumReport) -> Result<f64> {
    let dim = report.dim();
    let mut acc = CMat::zeros(dim, dim);
    for n in 0..report.n_distinct() {
        acc += subspace_projector(report, n)?;
    }
    let mut ident = CMat::zeros(dim, dim);
    for i in 0..dim {
        ident[(i, i)] = ONE;
    }
    let _ = ZERO;
    Ok(crate::matrix::frobenius(&(acc - ident)))
}
