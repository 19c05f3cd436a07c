//! Real coordinates for Hermitian matrices.
//!
//! A `d x d` Hermitian matrix is stored as `d^2` real coordinates against a
//! fixed Hilbert-Schmidt orthonormal basis: the normalized identity first,
//! then the symmetric and antisymmetric off-diagonal generators for each pair
//! `j < k`, then the traceless diagonal generators.

use nalgebra::{Complex, DMatrix, DVector};

use crate::scalar::{from_usize, Real};

pub type CMatrix<T> = DMatrix<Complex<T>>;

/// Orthonormal Hermitian basis of `d x d` matrices.
#[derive(Debug, Clone)]
pub struct HermitianBasis<T: Real> {
    d: usize,
    elements: Vec<CMatrix<T>>,
}

impl<T: Real> HermitianBasis<T> {
    pub fn new(d: usize) -> Self {
        assert!(d > 0, "Hermitian basis needs d >= 1");
        let zero = Complex::new(T::zero(), T::zero());
        let mut elements = Vec::with_capacity(d * d);

        let inv_sqrt_d = T::one() / from_usize::<T>(d).sqrt();
        elements.push(CMatrix::from_diagonal_element(
            d,
            d,
            Complex::new(inv_sqrt_d, T::zero()),
        ));

        let inv_sqrt2 = T::one() / (T::one() + T::one()).sqrt();
        for j in 0..d {
            for k in (j + 1)..d {
                let mut sym = CMatrix::from_element(d, d, zero);
                sym[(j, k)] = Complex::new(inv_sqrt2, T::zero());
                sym[(k, j)] = Complex::new(inv_sqrt2, T::zero());
                elements.push(sym);

                let mut anti = CMatrix::from_element(d, d, zero);
                anti[(j, k)] = Complex::new(T::zero(), -inv_sqrt2);
                anti[(k, j)] = Complex::new(T::zero(), inv_sqrt2);
                elements.push(anti);
            }
        }
        for l in 1..d {
            let lf = from_usize::<T>(l);
            let norm = T::one() / (lf * (lf + T::one())).sqrt();
            let mut diag = CMatrix::from_element(d, d, zero);
            for i in 0..l {
                diag[(i, i)] = Complex::new(norm, T::zero());
            }
            diag[(l, l)] = Complex::new(-lf * norm, T::zero());
            elements.push(diag);
        }
        Self { d, elements }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> &CMatrix<T> {
        &self.elements[i]
    }

    /// `x_i = tr(B_i X)`, keeping the real part (exact for Hermitian `X`).
    pub fn coordinates(&self, x: &CMatrix<T>) -> DVector<T> {
        DVector::from_iterator(self.len(), self.elements.iter().map(|b| trace_product(b, x).re))
    }

    /// Complex coordinates of an arbitrary, possibly non-Hermitian, matrix.
    pub fn complex_coordinates(&self, x: &CMatrix<T>) -> Vec<Complex<T>> {
        self.elements.iter().map(|b| trace_product(b, x)).collect()
    }

    pub fn matrix(&self, coords: &DVector<T>) -> CMatrix<T> {
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = CMatrix::from_element(self.d, self.d, zero);
        for (b, c) in self.elements.iter().zip(coords.iter()) {
            out += b * Complex::new(*c, T::zero());
        }
        out
    }

    /// Coordinates of the pure state `|psi><psi|`; `psi` is normalized here.
    pub fn pure_state(&self, psi: &DVector<Complex<T>>) -> DVector<T> {
        let norm_sq = psi.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        let rho = psi * psi.adjoint() / Complex::new(norm_sq, T::zero());
        self.coordinates(&rho)
    }
}

/// `tr(A B)`.
fn trace_product<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

fn hermitian_part<T: Real>(x: &CMatrix<T>) -> CMatrix<T> {
    (x + x.adjoint()) * Complex::new(T::one() / (T::one() + T::one()), T::zero())
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues<T: Real>(x: &CMatrix<T>) -> Vec<T> {
    let mut vals: Vec<T> = hermitian_part(x)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    vals
}

/// Eigenvalues and eigenvectors (as columns) of a Hermitian matrix.
pub fn hermitian_eigen<T: Real>(x: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let eig = hermitian_part(x).symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

pub fn trace_norm<T: Real>(x: &CMatrix<T>) -> T {
    hermitian_eigenvalues(x)
        .into_iter()
        .fold(T::zero(), |acc, v| acc + v.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn basis_is_orthonormal() {
        for d in 1..=4 {
            let basis = HermitianBasis::<f64>::new(d);
            assert_eq!(basis.len(), d * d);
            for i in 0..basis.len() {
                let c = basis.coordinates(basis.element(i));
                for j in 0..basis.len() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(c[j], want, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn round_trip_and_trace() {
        let basis = HermitianBasis::<f64>::new(3);
        let coords = DVector::from_iterator(9, (0..9).map(|i| (i as f64) * 0.3 - 1.0));
        let m = basis.matrix(&coords);
        assert_abs_diff_eq!(basis.coordinates(&m), coords, epsilon = 1e-13);
        let tr: f64 = (0..3).map(|i| m[(i, i)].re).sum();
        assert_abs_diff_eq!(tr, 3f64.sqrt() * coords[0], epsilon = 1e-13);
    }

    #[test]
    fn trace_norm_of_diagonal() {
        let mut x = CMatrix::from_element(2, 2, Complex::new(0.0, 0.0));
        x[(0, 0)] = Complex::new(0.5, 0.0);
        x[(1, 1)] = Complex::new(-0.5, 0.0);
        assert_abs_diff_eq!(trace_norm(&x), 1.0, epsilon = 1e-14);
    }
}
