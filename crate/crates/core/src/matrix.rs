//! Dense complex matrix helpers shared by the spectral, decomposition and
//! simulation modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entry of `m - m†`.
pub fn hermiticity_residual(m: &CMat) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn check_hermitian(m: &CMat) -> Result<()> {
    let res = hermiticity_residual(m);
    if res < 1e-10 * frobenius(m).max(1.0) {
        Ok(())
    } else {
        Err(Error::NotHermitian(res))
    }
}

/// Hermitian matrix validated (and symmetrized) at construction.
#[derive(Debug, Clone)]
pub struct DenseHermitian {
    mat: CMat,
}

impl DenseHermitian {
    pub fn new(mat: CMat) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimMismatch(mat.nrows(), mat.ncols()));
        }
        if !mat.nrows().is_power_of_two() {
            return Err(Error::Invalid(format!(
                "dimension {} is not a power of two",
                mat.nrows()
            )));
        }
        check_hermitian(&mat)?;
        let sym = (&mat + mat.adjoint()).scale(0.5);
        Ok(Self { mat: sym })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }
}

/// Haar-ish random unitary from the QR of a complex Gaussian sample.
pub fn random_unitary<R: Rng>(dim: usize, rng: &mut R) -> CMat {
    let raw = CMat::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let qr = raw.qr();
    qr.q()
}

pub fn random_hermitian<R: Rng>(dim: usize, rng: &mut R) -> CMat {
    let raw = CMat::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    (&raw + raw.adjoint()).scale(0.5)
}

/// Hermitian matrix with a prescribed (real) spectrum in a random basis.
pub fn hermitian_with_spectrum<R: Rng>(values: &[f64], rng: &mut R) -> CMat {
    let dim = values.len();
    let q = random_unitary(dim, rng);
    let mut d = CMat::zeros(dim, dim);
    for (i, v) in values.iter().enumerate() {
        d[(i, i)] = Complex64::new(*v, 0.0);
    }
    &q * d * q.adjoint()
}

/// Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi
/// rotations.
///
/// Each rotation `J = diag(1, e^{−iφ})·R(θ)` zeroes one off-diagonal entry
/// after its phase is factored out, so the accumulated eigenvectors stay
/// unitary to machine precision and degenerate clusters keep full accuracy
/// (the library QL paths lose digits there).
///
/// Returns eigenvalues ascending and the unitary of eigenvectors (columns).
pub fn hermitian_eigen(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimMismatch(m.nrows(), m.ncols()));
    }
    // Precondition with the library solver: its eigenvectors stay unitary
    // but lose accuracy inside degenerate clusters, leaving a nearly
    // diagonal matrix that the Jacobi sweeps clean up cheaply.
    let (mut work, pre) = if n >= 16 {
        let eig = m.clone().symmetric_eigen();
        let q = eig.eigenvectors;
        let rotated = q.adjoint() * m * &q;
        let symmetrized = (&rotated + rotated.adjoint()).scale(0.5);
        (symmetrized, Some(q))
    } else {
        (m.clone(), None)
    };
    jacobi_in_place(&mut work, n)?;
    let (values, v) = jacobi_take(work);
    let basis_raw = match pre {
        Some(q) => q * v,
        None => v,
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| values[x].partial_cmp(&values[y]).unwrap());
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut basis = CMat::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        basis.set_column(col, &basis_raw.column(src));
    }
    Ok((sorted, basis))
}

struct JacobiState {
    values: Vec<f64>,
    v: CMat,
}

thread_local! {
    static JACOBI_RESULT: std::cell::RefCell<Option<JacobiState>> =
        const { std::cell::RefCell::new(None) };
}

fn jacobi_take(_a: CMat) -> (Vec<f64>, CMat) {
    JACOBI_RESULT.with(|slot| {
        let state = slot.borrow_mut().take().expect("jacobi_in_place ran");
        (state.values, state.v)
    })
}

/// Cyclic Jacobi on a Hermitian matrix held in a `DMatrix`; eigenvalues and
/// accumulated rotations are stashed for [`jacobi_take`].
fn jacobi_in_place(mat: &mut CMat, n: usize) -> Result<()> {
    // column-major working copies
    let mut a: Vec<Complex64> = mat.iter().copied().collect();
    let mut v: Vec<Complex64> = vec![ZERO; n * n];
    for i in 0..n {
        v[i * n + i] = ONE;
    }
    let idx = |r: usize, c: usize| c * n + r;

    let off_norm = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for c in 0..n {
            for r in 0..n {
                if r != c {
                    s += a[idx(r, c)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let scale = a.iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(1e-300);

    for sweep in 0..60 {
        let off = off_norm(&a);
        if off <= 1e-15 * scale * n as f64 {
            break;
        }
        // threshold strategy: rotate aggressively only once off-diagonals shrink
        let tresh = if sweep < 3 { 0.2 * off / (n * n) as f64 } else { 0.0 };
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[idx(p, q)];
                let mag = apq.norm();
                let app = a[idx(p, p)].re;
                let aqq = a[idx(q, q)].re;
                // negligible relative to the diagonal: flush to zero
                if sweep > 4
                    && app.abs() + 100.0 * mag == app.abs()
                    && aqq.abs() + 100.0 * mag == aqq.abs()
                {
                    a[idx(p, q)] = ZERO;
                    a[idx(q, p)] = ZERO;
                    continue;
                }
                if mag <= tresh || mag == 0.0 {
                    continue;
                }
                // factor out phase: apq = |apq| e^{iφ}
                let phase = apq / Complex64::new(mag, 0.0);
                // real rotation angle from the NR-stable formulation
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau.abs() > 1e12 {
                    1.0 / (2.0 * tau)
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J columns: col_p' = c·col_p − s e^{−iφ} col_q
                //            col_q' = s·col_p + c e^{−iφ} col_q
                let se_m = phase.conj() * s;
                let ce_m = phase.conj() * c;
                for r in 0..n {
                    let vp = a[idx(r, p)];
                    let vq = a[idx(r, q)];
                    a[idx(r, p)] = vp * c - vq * se_m;
                    a[idx(r, q)] = vp * s + vq * ce_m;
                }
                // rows: row_p' = c·row_p − s e^{iφ} row_q
                //       row_q' = s·row_p + c e^{iφ} row_q
                let se_p = phase * s;
                let ce_p = phase * c;
                for col in 0..n {
                    let vp = a[idx(p, col)];
                    let vq = a[idx(q, col)];
                    a[idx(p, col)] = vp * c - vq * se_p;
                    a[idx(q, col)] = vp * s + vq * ce_p;
                }
                for r in 0..n {
                    let vp = v[idx(r, p)];
                    let vq = v[idx(r, q)];
                    v[idx(r, p)] = vp * c - vq * se_m;
                    v[idx(r, q)] = vp * s + vq * ce_m;
                }
            }
        }
    }
    let final_off = off_norm(&a);
    if final_off > 1e-11 * scale * n as f64 {
        return Err(Error::Numerical(format!(
            "Jacobi iteration stalled with off-diagonal norm {final_off:.3e}"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[idx(x, x)].re.partial_cmp(&a[idx(y, y)].re).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[idx(i, i)].re).collect();
    let mut basis = CMat::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            basis[(r, col)] = v[idx(r, src)];
        }
    }
    Ok((values, basis))
}

/// Content hash used to key spectral/expectation caches.
pub fn matrix_hash(m: &CMat) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    m.nrows().hash(&mut h);
    for c in m.iter() {
        c.re.to_bits().hash(&mut h);
        c.im.to_bits().hash(&mut h);
    }
    h.finish()
}
