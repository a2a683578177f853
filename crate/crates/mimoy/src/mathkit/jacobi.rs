//! One-sided Jacobi singular value decomposition for small dense complex
//! matrices.
//!
//! Plane rotations applied on the right orthogonalize the working columns;
//! on convergence the column norms are the singular values and the
//! accumulated rotations are the right singular vectors. The one-sided
//! scheme keeps full relative accuracy for the small singular values, which
//! the null-space extraction relies on: a null direction comes out with
//! residual at rounding level rather than at `sqrt(eps)` as a Gram-matrix
//! eigendecomposition would give.

use nalgebra::{Complex, DMatrix};

type C = Complex<f64>;

/// Right singular structure of a matrix: `a * right_vectors.column(i)` has
/// norm `singular_values[i]`, with values sorted descending.
#[derive(Debug, Clone)]
pub struct RightSvd {
    pub singular_values: Vec<f64>,
    pub right_vectors: DMatrix<C>,
}

const MAX_SWEEPS: usize = 64;

/// One-sided Jacobi on the columns of `a` (any shape). Returns all
/// `a.ncols()` singular values (zeros included when `ncols > nrows`)
/// together with the full orthonormal set of right singular vectors.
pub fn right_svd(a: &DMatrix<C>) -> RightSvd {
    let c = a.ncols();
    let mut w = a.clone();
    let mut v = DMatrix::<C>::identity(c, c);

    let tol = f64::EPSILON;
    // Columns below this norm are rounding noise spanning the null space;
    // rotating two of them against each other never converges (their
    // mutual angle is random) and the denormal arithmetic destroys the
    // unitarity of the accumulated rotations.
    let noise_floor = tol * w.norm();
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..c {
            for j in (i + 1)..c {
                let wi = w.column(i);
                let wj = w.column(j);
                let aa = wi.norm_squared();
                let bb = wj.norm_squared();
                if aa.sqrt() <= noise_floor && bb.sqrt() <= noise_floor {
                    continue;
                }
                let cc: C = wi.dotc(&wj);
                let off = cc.norm();
                if off <= tol * (aa * bb).sqrt() || off == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = cc / off;
                // tan(2*phi) = 2|c| / (a - b); take the smaller-angle root.
                let zeta = (aa - bb) / (2.0 * off);
                let t = if zeta == 0.0 {
                    1.0
                } else if zeta.abs() > 1e12 {
                    // asymptote of the closed form; avoids overflow in zeta^2
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                apply_rotation(&mut w, i, j, cs, sn, phase);
                apply_rotation(&mut v, i, j, cs, sn, phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..c).collect();
    let norms: Vec<f64> = (0..c).map(|i| w.column(i).norm()).collect();
    // Descending by sigma; stable, so equal values keep natural index order.
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap());

    let singular_values = order.iter().map(|&i| norms[i]).collect();
    let mut right_vectors = DMatrix::<C>::zeros(c, c);
    for (dst, &src) in order.iter().enumerate() {
        right_vectors.set_column(dst, &v.column(src));
    }
    RightSvd {
        singular_values,
        right_vectors,
    }
}

/// Columns `(i, j)` <- `(cs*wi + conj(phase)*sn*wj, -phase*sn*wi + cs*wj)`.
fn apply_rotation(m: &mut DMatrix<C>, i: usize, j: usize, cs: f64, sn: f64, phase: C) {
    for r in 0..m.nrows() {
        let mi = m[(r, i)];
        let mj = m[(r, j)];
        m[(r, i)] = mi * cs + mj * phase.conj() * sn;
        m[(r, j)] = mj * cs - mi * phase * sn;
    }
}

/// Cyclic two-sided Jacobi eigendecomposition of a Hermitian matrix.
/// Returns eigenvalues ascending.
pub fn hermitian_eigenvalues(g: &DMatrix<C>) -> Vec<f64> {
    let n = g.nrows();
    let mut a = g.clone();
    let tol = f64::EPSILON;
    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        let mut diag = 0.0f64;
        for i in 0..n {
            diag += a[(i, i)].re.abs();
            for j in (i + 1)..n {
                off += a[(i, j)].norm();
            }
        }
        if off <= tol * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let apq = a[(i, j)];
                let na = apq.norm();
                if na == 0.0 {
                    continue;
                }
                let app = a[(i, i)].re;
                let aqq = a[(j, j)].re;
                let phase = apq / na;
                let zeta = (app - aqq) / (2.0 * na);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                // Similarity transform: A <- J^H A J with the rotation in
                // the (i, j) plane.
                for r in 0..n {
                    let ari = a[(r, i)];
                    let arj = a[(r, j)];
                    a[(r, i)] = ari * cs + arj * phase.conj() * sn;
                    a[(r, j)] = arj * cs - ari * phase * sn;
                }
                for col in 0..n {
                    let aic = a[(i, col)];
                    let ajc = a[(j, col)];
                    a[(i, col)] = aic * cs + ajc * phase * sn;
                    a[(j, col)] = ajc * cs - aic * phase.conj() * sn;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    vals
}
