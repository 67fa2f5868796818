use nalgebra::DMatrix;
use num_complex::Complex64;

/// Eigenvalues of a Hermitian matrix, sorted descending.
pub(crate) fn hermitian_eigenvalues(m: DMatrix<Complex64>) -> Vec<f64> {
    let mut eig: Vec<f64> = match m.nrows() {
        0 => Vec::new(),
        1 => vec![m[(0, 0)].re],
        _ => m.symmetric_eigenvalues().iter().copied().collect(),
    };
    eig.sort_by(|a, b| b.total_cmp(a));
    eig
}

/// Dense Gram matrix `G[i][j] = sum_c M[i,c] conj(M[j,c])` from sparse columns.
pub(crate) fn gram_from_columns<'a>(
    dim: usize,
    columns: impl IntoIterator<Item = &'a [(usize, Complex64)]>,
) -> DMatrix<Complex64> {
    let mut g = DMatrix::<Complex64>::zeros(dim, dim);
    for col in columns {
        for &(i, x) in col {
            for &(j, y) in col {
                g[(i, j)] += x * y.conj();
            }
        }
    }
    g
}
