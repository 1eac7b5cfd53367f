use nalgebra::{DMatrix, SymmetricEigen};

/// Projects the columns of `x` (features x instances) onto the two leading
/// principal components of the covariance matrix. Each component's sign is
/// fixed so that its largest-magnitude loading is positive.
///
/// Returns a 2 x instances matrix.
pub fn pca_2d(x: &DMatrix<f64>) -> DMatrix<f64> {
    let (d, n) = x.shape();
    assert!(d >= 2, "PCA to 2D needs at least two features");
    let mut centered = x.clone();
    for r in 0..d {
        let m = centered.row(r).mean();
        centered.row_mut(r).add_scalar_mut(-m);
    }
    let denom = (n.max(2) - 1) as f64;
    let cov = &centered * centered.transpose() / denom;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut loadings = DMatrix::zeros(2, d);
    for (k, &col) in order.iter().take(2).enumerate() {
        let v = eig.eigenvectors.column(col);
        let lead = (0..d)
            .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a)))
            .unwrap();
        let sign = if v[lead] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..d {
            loadings[(k, j)] = sign * v[j];
        }
    }
    loadings * centered
}
