//! Smallest eigenpair of symmetric-definite pencils `A x = λ B x`.
//!
//! [`smallest_eig`] runs inverse iteration on `(A - μB)⁻¹ B` with a shift
//! `μ` below the spectrum. A successful Cholesky factorization of
//! `A - μB` certifies that `μ` lies below every eigenvalue, so the
//! iteration can only converge to the smallest one. The shift starts at
//! `-0.1 ‖A‖∞` and is periodically moved toward the current Rayleigh
//! quotient, again only to certified positions. [`dense_eig_all`]
//! computes the whole spectrum by Cholesky reduction and cyclic Jacobi
//! rotations and serves as the verification oracle.

use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, EnvelopeCholesky, SymMatrix};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 500;
pub const DENSE_DIM_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigOptions {
    /// Relative residual `‖Ax − λBx‖ / ‖Ax‖` required on return.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub lambda: f64,
    /// B-normalized eigenvector.
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// Shift used for the factorization.
    pub shift: f64,
}

/// Relative residual of an approximate eigenpair.
pub fn residual(a: &SymMatrix, b: &SymMatrix, lambda: f64, x: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let bx = b.mul_vec(x);
    let r: Vec<f64> = ax.iter().zip(&bx).map(|(p, q)| p - lambda * q).collect();
    let scale = norm2(&ax);
    let rn = norm2(&r);
    if scale > 0.0 {
        rn / scale
    } else {
        rn
    }
}

/// Fixed start vector without the symmetries of the meshes used here, so it
/// has a component along every eigenvector of interest.
fn start_vector(n: usize) -> Vec<f64> {
    const GOLDEN: f64 = 0.618_033_988_749_894_8;
    (0..n)
        .map(|i| 1.0 + ((i as f64 + 1.0) * GOLDEN).fract())
        .collect()
}

fn b_normalize(b: &SymMatrix, x: &mut [f64]) -> Result<()> {
    let bn = dot(x, &b.mul_vec(x));
    if !(bn > 0.0) || !bn.is_finite() {
        return Err(Error::FactorizationFailure("iterate lost B-norm".into()));
    }
    let s = bn.sqrt();
    x.iter_mut().for_each(|v| *v /= s);
    Ok(())
}

fn check_pencil(a: &SymMatrix, b: &SymMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "A is {0}x{0} but B is {1}x{1}",
            a.dim(),
            b.dim()
        )));
    }
    if a.dim() == 0 {
        return Err(Error::DimensionMismatch("empty pencil".into()));
    }
    Ok(())
}

/// Factors `A − μB`, moving `μ` further down until the factorization succeeds.
fn factor_shifted(a: &SymMatrix, b: &SymMatrix) -> Result<(f64, EnvelopeCholesky)> {
    let norm_a = a.norm_inf();
    let mut shift = if norm_a > 0.0 { -0.1 * norm_a } else { -1.0 };
    let b_scale = b.norm_inf();
    for _ in 0..64 {
        if let Some(chol) = try_factor(a, b, shift)? {
            return Ok((shift, chol));
        }
        shift = 4.0 * shift - norm_a / b_scale.max(f64::MIN_POSITIVE);
    }
    Err(Error::FactorizationFailure(
        "no shift below the spectrum found".into(),
    ))
}

/// Cholesky factor of `A − μB`, or `None` when it is not positive definite,
/// i.e. when `μ` is not below the whole spectrum.
fn try_factor(a: &SymMatrix, b: &SymMatrix, shift: f64) -> Result<Option<EnvelopeCholesky>> {
    let shifted = a.combine(1.0, b, -shift)?;
    Ok(EnvelopeCholesky::factor(&shifted).ok())
}

/// Moves the shift toward the Rayleigh quotient `theta`, keeping only
/// shifts whose factorization proves they stay below the spectrum.
fn refine_shift(
    a: &SymMatrix,
    b: &SymMatrix,
    shift: f64,
    theta: f64,
) -> Result<Option<(f64, EnvelopeCholesky)>> {
    let distance = theta - shift;
    // closer than this the factorization can no longer tell the sides apart
    let floor = 1e-7 * theta.abs().max(distance);
    for fraction in [0.01, 0.1, 0.5] {
        let step = (fraction * distance).max(floor);
        let candidate = theta - step;
        if candidate <= shift {
            break;
        }
        if let Some(chol) = try_factor(a, b, candidate)? {
            return Ok(Some((candidate, chol)));
        }
    }
    Ok(None)
}

/// Iterations between attempts to move the shift.
const SHIFT_UPDATE_INTERVAL: usize = 8;

pub fn smallest_eig(a: &SymMatrix, b: &SymMatrix, opts: EigOptions) -> Result<EigenResult> {
    check_pencil(a, b)?;
    EnvelopeCholesky::factor(b).map_err(|_| Error::IndefiniteB)?;
    let (mut shift, mut chol) = factor_shifted(a, b)?;

    let mut x = start_vector(a.dim());
    b_normalize(b, &mut x)?;
    let mut best: Option<EigenResult> = None;
    for it in 1..=opts.max_iter {
        let mut z = chol.solve(&b.mul_vec(&x));
        b_normalize(b, &mut z)?;
        x = z;
        let lambda = dot(&x, &a.mul_vec(&x));
        let res = residual(a, b, lambda, &x);
        let improved = best.as_ref().is_none_or(|r| res < r.residual);
        if improved {
            best = Some(EigenResult {
                lambda,
                vector: x.clone(),
                iterations: it,
                residual: res,
                shift,
            });
        }
        if res <= opts.tol {
            break;
        }
        if it % SHIFT_UPDATE_INTERVAL == 0 {
            if let Some((s, c)) = refine_shift(a, b, shift, lambda)? {
                shift = s;
                chol = c;
            }
        }
    }
    let mut out = best.expect("at least one iteration runs");
    // re-verify independently of the loop's bookkeeping
    out.residual = residual(a, b, out.lambda, &out.vector);
    if out.residual <= opts.tol {
        Ok(out)
    } else {
        Err(Error::NotConverged {
            max_iter: opts.max_iter,
            best: Box::new(out),
        })
    }
}

type Dense = Vec<Vec<f64>>;

fn dense_cholesky(b: &Dense) -> Result<Dense> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s = b[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::IndefiniteB);
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Ok(l)
}

/// `L⁻¹ A L⁻ᵀ` for lower-triangular `L`.
fn congruence(l: &Dense, a: &Dense) -> Dense {
    let n = l.len();
    // Y = L⁻¹ A, column by column
    let mut y = a.clone();
    for col in 0..n {
        for i in 0..n {
            let s = y[i][col] - (0..i).map(|k| l[i][k] * y[k][col]).sum::<f64>();
            y[i][col] = s / l[i][i];
        }
    }
    // C = Y L⁻ᵀ, i.e. solve L Cᵀ = Yᵀ row by row
    let mut c = vec![vec![0.0; n]; n];
    for row in 0..n {
        for j in 0..n {
            let s = y[row][j] - (0..j).map(|k| l[j][k] * c[row][k]).sum::<f64>();
            c[row][j] = s / l[j][j];
        }
    }
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (c[i][j] + c[j][i]);
            c[i][j] = avg;
            c[j][i] = avg;
        }
    }
    c
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(mut c: Dense) -> Vec<f64> {
    let n = c.len();
    let frob = c.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let off = |c: &Dense| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += c[i][j] * c[i][j];
                }
            }
        }
        s.sqrt()
    };
    for _sweep in 0..100 {
        if off(&c) <= 1e-14 * frob {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = c[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (c[q][q] - c[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let akp = c[k][p];
                    let akq = c[k][q];
                    c[k][p] = cs * akp - sn * akq;
                    c[k][q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = c[p][k];
                    let aqk = c[q][k];
                    c[p][k] = cs * apk - sn * aqk;
                    c[q][k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| c[i][i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Full spectrum of the pencil, ascending.
pub fn dense_eig_all(a: &SymMatrix, b: &SymMatrix) -> Result<Vec<f64>> {
    check_pencil(a, b)?;
    if a.dim() > DENSE_DIM_LIMIT {
        return Err(Error::DimensionGuard {
            dim: a.dim(),
            limit: DENSE_DIM_LIMIT,
        });
    }
    let l = dense_cholesky(&b.to_dense())?;
    Ok(jacobi_eigenvalues(congruence(&l, &a.to_dense())))
}
