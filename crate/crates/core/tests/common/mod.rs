use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn normal_matrix(rng: &mut ChaCha20Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

/// Rows drawn from `x = B z + μ + ε` with each column of B having squared
/// norm `snr · σ²`.
pub fn synthetic(seed: u64, n: usize, d: usize, k: usize, sigma2: f64, snr: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut b = normal_matrix(&mut rng, d, k).qr().q();
    b *= (snr * sigma2).sqrt();
    let mu = DVector::from_fn(d, |i, _| 0.1 * i as f64);
    let z = normal_matrix(&mut rng, n, k);
    let e = normal_matrix(&mut rng, n, d) * sigma2.sqrt();
    let mut x = z * b.transpose() + e;
    for mut row in x.row_iter_mut() {
        row += mu.transpose();
    }
    (x, b)
}

pub fn sample_cov(x: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let mu = x.row_mean().transpose();
    let mut c = x.clone();
    for mut row in c.row_iter_mut() {
        row -= mu.transpose();
    }
    let s = c.transpose() * &c / x.nrows() as f64;
    (mu, s)
}
