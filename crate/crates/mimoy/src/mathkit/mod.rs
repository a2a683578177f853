//! Deterministic complex linear-algebra kernels used by every other module.
//!
//! All operations are pure functions of their inputs; matrices here never
//! exceed a few dozen entries per side, so everything is dense and direct.

mod jacobi;

use nalgebra::{Complex, DMatrix, DVector};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

pub use jacobi::{right_svd, RightSvd};

pub type C64 = Complex<f64>;
/// Dense complex matrix in column-major storage; row-major semantic
/// constructors are available via `ComplexMatrix::from_row_slice`.
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Default relative singular-value threshold for rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Orthonormal basis of a subspace of `C^ambient_dim`.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    columns: ComplexMatrix,
}

impl SubspaceBasis {
    /// Wraps a matrix whose columns are expected to be orthonormal.
    /// The Gram matrix must equal the identity to 1e-10.
    pub fn new(columns: ComplexMatrix) -> Result<Self> {
        let dim = columns.ncols();
        let gram = columns.adjoint() * &columns;
        let id = ComplexMatrix::identity(dim, dim);
        let err = (gram - id).norm();
        if err > 1e-10 {
            return Err(Error::Domain(format!(
                "subspace basis columns not orthonormal (gram error {err:.3e})"
            )));
        }
        Ok(Self { columns })
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    pub fn column(&self, i: usize) -> ComplexVector {
        self.columns.column(i).into_owned()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.columns
    }
}

/// Orthonormal basis of `{x : A x = 0}`, determined by singular values
/// `<= tol * sigma_max`. Basis vectors are ordered by ascending singular
/// value, ties broken by natural index order, so repeated calls select the
/// same vectors. An empty null space yields a dimension-0 basis.
pub fn null_space_basis(a: &ComplexMatrix, tol: f64) -> Result<SubspaceBasis> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::Domain("null_space_basis: empty matrix".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("null_space_basis: tol must be positive, got {tol}")));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Domain("null_space_basis: non-finite entries".into()));
    }
    let svd = right_svd(a);
    let sigma_max = svd.singular_values[0];
    let cutoff = tol * sigma_max;
    let c = a.ncols();
    // Singular values are descending; null directions sit at the tail.
    let rank = svd.singular_values.iter().take_while(|&&s| s > cutoff).count();
    let dim = c - rank;
    let mut cols = ComplexMatrix::zeros(c, dim);
    // Reverse the tail so the output is ascending in sigma.
    for (out, src) in (rank..c).rev().enumerate() {
        cols.set_column(out, &svd.right_vectors.column(src));
    }
    SubspaceBasis::new(cols)
}

/// Orthonormal basis of the orthogonal complement of the column space of a
/// tall `H` (the left null space): every returned `v` satisfies
/// `v^H H ~= 0`.
pub fn left_null_basis(h: &ComplexMatrix, tol: f64) -> Result<SubspaceBasis> {
    if h.nrows() <= h.ncols() {
        return Err(Error::Domain(format!(
            "left_null_basis: expected more rows than columns, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    null_space_basis(&h.adjoint(), tol)
}

/// Acute angle `arccos(|a^H b| / (|a||b|))` in `[0, pi/2]`.
pub fn acute_angle(a: &ComplexVector, b: &ComplexVector) -> Result<f64> {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Domain("acute_angle: zero vector".into()));
    }
    if a.len() != b.len() {
        return Err(Error::Domain("acute_angle: dimension mismatch".into()));
    }
    let inner = a.dotc(b).norm();
    Ok((inner / (na * nb)).clamp(0.0, 1.0).acos())
}

/// Chordal distance `sqrt(dim - trace(A A^H B B^H))` between two
/// equal-dimension subspaces; symmetric and invariant under unitary
/// re-basis of either argument.
pub fn chordal_distance(a: &SubspaceBasis, b: &SubspaceBasis) -> Result<f64> {
    if a.ambient_dim() != b.ambient_dim() || a.dim() != b.dim() {
        return Err(Error::Domain(format!(
            "chordal_distance: dimension mismatch ({}x{} vs {}x{})",
            a.ambient_dim(),
            a.dim(),
            b.ambient_dim(),
            b.dim()
        )));
    }
    // trace(A A^H B B^H) = ||A^H B||_F^2
    let cross = a.as_matrix().adjoint() * b.as_matrix();
    let t = cross.norm_squared();
    Ok((a.dim() as f64 - t).max(0.0).sqrt())
}

/// Smallest eigenvalue of a Hermitian positive semidefinite matrix.
pub fn min_eigenvalue_hermitian(g: &ComplexMatrix) -> Result<f64> {
    if g.nrows() != g.ncols() {
        return Err(Error::Domain("min_eigenvalue_hermitian: matrix not square".into()));
    }
    let herm_err = (g - g.adjoint()).norm();
    if herm_err > 1e-9 * (1.0 + g.norm()) {
        return Err(Error::Domain(format!(
            "min_eigenvalue_hermitian: not Hermitian (asymmetry {herm_err:.3e})"
        )));
    }
    let vals = jacobi::hermitian_eigenvalues(g);
    let min = vals[0];
    if min < -1e-10 * (1.0 + g.norm()) {
        return Err(Error::Domain(format!(
            "min_eigenvalue_hermitian: matrix not PSD (lambda_min {min:.3e})"
        )));
    }
    Ok(min)
}

/// Haar-distributed unitary matrix, deterministic for a fixed seed.
/// QR of a complex Gaussian matrix with the R-diagonal phase absorbed into
/// Q, which makes the distribution exactly Haar.
pub fn haar_unitary(n: usize, seed: u64) -> ComplexMatrix {
    assert!(n >= 1, "haar_unitary: n must be >= 1");
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let g = ComplexMatrix::from_fn(n, n, |_, _| standard_cn(&mut rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() == 0.0 { C64::new(1.0, 0.0) } else { d / d.norm() };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// One draw of the circular complex Gaussian CN(0, 1): independent real and
/// imaginary parts, each with variance 1/2.
pub fn standard_cn(rng: &mut impl rand::Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re * std::f64::consts::FRAC_1_SQRT_2, im * std::f64::consts::FRAC_1_SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn cmat(rng: &mut impl Rng, r: usize, c: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(r, c, |_, _| standard_cn(rng))
    }

    #[test]
    fn null_space_of_coordinate_row() {
        // [1, 0] -> basis {(0, 1)}
        let a = ComplexMatrix::from_row_slice(1, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let b = null_space_basis(&a, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(b.dim(), 1);
        let v = b.column(0);
        assert!(v[0].norm() < 1e-14);
        assert!((v[1].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn null_space_of_zero_matrix_spans_everything() {
        let a = ComplexMatrix::zeros(2, 2);
        let b = null_space_basis(&a, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(b.dim(), 2);
    }

    #[test]
    fn null_space_of_random_wide_matrix() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        let a = cmat(&mut rng, 3, 4);
        let b = null_space_basis(&a, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(b.dim(), 1);
        let sigma_max = right_svd(&a).singular_values[0];
        let res = (&a * b.column(0)).norm();
        assert!(res <= 10.0 * DEFAULT_RANK_TOL * sigma_max);
        assert!(res < 1e-10);
        // Oracle: nalgebra SVD smallest right singular vector spans the same line.
        let svd = a.clone().svd(false, true);
        let vt = svd.v_t.unwrap();
        // v_t rows are right singular vectors^H; the null vector is orthogonal
        // to all rows kept by the rank; check A * v residual directly instead.
        let _ = vt;
    }

    #[test]
    fn left_null_basis_of_axis_columns() {
        // H columns e1, e2 in C^3 -> left null {e3} up to phase
        let mut h = ComplexMatrix::zeros(3, 2);
        h[(0, 0)] = C64::new(1.0, 0.0);
        h[(1, 1)] = C64::new(1.0, 0.0);
        let b = left_null_basis(&h, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(b.dim(), 1);
        let v = b.column(0);
        assert!(v[0].norm() < 1e-14 && v[1].norm() < 1e-14);
        assert!((v[2].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn left_null_basis_dimensions_and_residuals() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(4);
        let h = cmat(&mut rng, 6, 4);
        let b = left_null_basis(&h, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(b.dim(), 2);
        for i in 0..2 {
            let res = (h.adjoint() * b.column(i)).norm();
            assert!(res < 1e-10, "residual {res:.3e}");
        }
        // rank-1 tall matrix -> complement has dimension 2
        let col = cmat(&mut rng, 3, 1);
        let row = cmat(&mut rng, 1, 2);
        let h1 = &col * &row;
        let b1 = left_null_basis(&h1, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(b1.dim(), 2);
    }

    #[test]
    fn full_row_rank_square_gives_empty_complement() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(8);
        let a = cmat(&mut rng, 4, 4);
        let b = null_space_basis(&a, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(b.dim(), 0);
    }

    #[test]
    fn acute_angle_known_values() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = ComplexVector::from_vec(vec![C64::new(s, 0.0), C64::new(0.0, s)]);
        assert!(acute_angle(&a, &a).unwrap() < 1e-7);

        let e1 = ComplexVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let e2 = ComplexVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        assert!((acute_angle(&e1, &e2).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-14);

        let d = ComplexVector::from_vec(vec![C64::new(s, 0.0), C64::new(s, 0.0)]);
        assert!((acute_angle(&e1, &d).unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-14);

        let zero = ComplexVector::from_vec(vec![C64::new(0.0, 0.0); 2]);
        assert!(acute_angle(&e1, &zero).is_err());
    }

    #[test]
    fn chordal_distance_extremes() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(10);
        let a = left_null_basis(&cmat(&mut rng, 6, 4), DEFAULT_RANK_TOL).unwrap();
        assert!(chordal_distance(&a, &a).unwrap() < 1e-9);

        // Orthogonal coordinate subspaces in C^4, dim 2 -> sqrt(2)
        let mut m1 = ComplexMatrix::zeros(4, 2);
        m1[(0, 0)] = C64::new(1.0, 0.0);
        m1[(1, 1)] = C64::new(1.0, 0.0);
        let mut m2 = ComplexMatrix::zeros(4, 2);
        m2[(2, 0)] = C64::new(1.0, 0.0);
        m2[(3, 1)] = C64::new(1.0, 0.0);
        let s1 = SubspaceBasis::new(m1).unwrap();
        let s2 = SubspaceBasis::new(m2).unwrap();
        let d = chordal_distance(&s1, &s2).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-14);
        assert!(chordal_distance(&s1, &a).is_err());
    }

    #[test]
    fn chordal_distance_equals_principal_angle_oracle() {
        // d_c^2 == sum_i sin^2(theta_i) with cos(theta_i) the singular
        // values of A^H B.
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = left_null_basis(&cmat(&mut rng, 6, 4), DEFAULT_RANK_TOL).unwrap();
            let b = left_null_basis(&cmat(&mut rng, 6, 4), DEFAULT_RANK_TOL).unwrap();
            let d = chordal_distance(&a, &b).unwrap();
            let cross = a.as_matrix().adjoint() * b.as_matrix();
            let svd = cross.svd(false, false);
            let oracle: f64 = svd
                .singular_values
                .iter()
                .map(|&s| 1.0 - (s.min(1.0)).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!((d - oracle).abs() < 1e-10, "{d} vs {oracle}");
        }
    }

    #[test]
    fn min_eigenvalue_known_and_oracle() {
        let id = ComplexMatrix::identity(3, 3);
        assert!((min_eigenvalue_hermitian(&id).unwrap() - 1.0).abs() < 1e-14);

        let d = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(2.0, 0.0),
            C64::new(3.0, 0.0),
        ]));
        assert!((min_eigenvalue_hermitian(&d).unwrap() - 1.0).abs() < 1e-14);

        // Inverse power iteration oracle on random Wishart matrices.
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(12);
        for _ in 0..10 {
            let h = cmat(&mut rng, 3, 3);
            let g = &h * h.adjoint();
            let ours = min_eigenvalue_hermitian(&g).unwrap();
            let oracle = inverse_power_min_eig(&g);
            assert!(
                (ours - oracle).abs() <= 1e-9 * oracle.max(1e-12),
                "{ours} vs {oracle}"
            );
        }

        let mut bad = cmat(&mut rng, 3, 3);
        bad[(0, 1)] += C64::new(0.5, 0.0);
        assert!(min_eigenvalue_hermitian(&bad).is_err());
    }

    fn inverse_power_min_eig(g: &ComplexMatrix) -> f64 {
        let lu = g.clone().lu();
        let mut x = ComplexVector::from_element(g.nrows(), C64::new(1.0, 0.3));
        x /= C64::new(x.norm(), 0.0);
        let mut lam = 0.0;
        for _ in 0..500 {
            let y = lu.solve(&x).expect("singular matrix in oracle");
            let ny = y.norm();
            x = y / C64::new(ny, 0.0);
            lam = (x.adjoint() * g * &x)[(0, 0)].re;
        }
        lam
    }

    #[test]
    fn haar_unitary_properties() {
        let u1 = haar_unitary(1, 7);
        assert!((u1[(0, 0)].norm() - 1.0).abs() < 1e-14);

        let a = haar_unitary(3, 42);
        let b = haar_unitary(3, 42);
        assert_eq!(a.as_slice(), b.as_slice());

        let u = haar_unitary(6, 3);
        let id = ComplexMatrix::identity(6, 6);
        assert!((u.adjoint() * &u - id).norm() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn acute_angle_scale_invariant(seed in 0u64..10_000, scale in 0.01f64..100.0, ph in 0.0f64..6.28) {
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let a = ComplexVector::from_fn(3, |_, _| standard_cn(&mut rng));
            let b = ComplexVector::from_fn(3, |_, _| standard_cn(&mut rng));
            let c = C64::new(scale * ph.cos(), scale * ph.sin());
            let base = acute_angle(&a, &b).unwrap();
            let scaled = acute_angle(&(a.clone() * c), &b).unwrap();
            prop_assert!((base - scaled).abs() < 1e-9);
        }

        #[test]
        fn chordal_distance_symmetric_and_unitary_invariant(seed in 0u64..10_000) {
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let h1 = ComplexMatrix::from_fn(6, 4, |_, _| standard_cn(&mut rng));
            let h2 = ComplexMatrix::from_fn(6, 4, |_, _| standard_cn(&mut rng));
            let a = left_null_basis(&h1, DEFAULT_RANK_TOL).unwrap();
            let b = left_null_basis(&h2, DEFAULT_RANK_TOL).unwrap();
            let dab = chordal_distance(&a, &b).unwrap();
            let dba = chordal_distance(&b, &a).unwrap();
            prop_assert!((dab - dba).abs() < 1e-12);
            // re-basis A by a random 2x2 unitary
            let q = haar_unitary(2, seed ^ 0xabcd);
            let a2 = SubspaceBasis::new(a.as_matrix() * q).unwrap();
            let d2 = chordal_distance(&a2, &b).unwrap();
            prop_assert!((dab - d2).abs() < 1e-12);
            prop_assert!(dab <= (a.dim() as f64).sqrt() + 1e-12);
        }

        #[test]
        fn rayleigh_ritz_lower_bound(seed in 0u64..10_000) {
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let h = ComplexMatrix::from_fn(3, 3, |_, _| standard_cn(&mut rng));
            let g = &h * h.adjoint();
            let lam = min_eigenvalue_hermitian(&g).unwrap();
            for _ in 0..8 {
                let mut x = ComplexVector::from_fn(3, |_, _| standard_cn(&mut rng));
                x /= C64::new(x.norm(), 0.0);
                let quad = (x.adjoint() * &g * &x)[(0, 0)].re;
                prop_assert!(lam <= quad + 1e-10);
            }
        }
    }
}
