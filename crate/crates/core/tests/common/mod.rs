//! Brute-force oracle shared by the integration targets.

use nalgebra::DMatrix;
use num_complex::Complex64 as C;

/// H_g and H_e on the N-photon block spanned by |k, N−k⟩ (k photons in
/// Alice), written straight from the lab Hamiltonian with φ.
pub fn block_hamiltonians(n: usize, g: f64, delta: f64, chi: f64, phi: f64) -> (DMatrix<C>, DMatrix<C>) {
    let d = n + 1;
    let mut hg = DMatrix::<C>::zeros(d, d);
    for k in 0..d {
        let nb = (n - k) as f64;
        hg[(k, k)] = C::new(-delta * nb, 0.0);
        if k + 1 < d {
            // a b† moves one photon Alice → Bob: |k+1, N−k−1⟩ → |k, N−k⟩.
            let amp = ((k + 1) as f64).sqrt() * ((n - k) as f64).sqrt();
            let c = C::from_polar(0.5 * g * amp, phi);
            hg[(k, k + 1)] = c;
            hg[(k + 1, k)] = c.conj();
        }
    }
    let mut he = hg.clone();
    for k in 0..d {
        he[(k, k)] += C::new(chi * (n - k) as f64, 0.0);
    }
    (hg, he)
}

pub fn sorted_eigen(h: DMatrix<C>) -> (Vec<f64>, DMatrix<C>) {
    let e = h.symmetric_eigen();
    let mut idx: Vec<usize> = (0..e.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(e.eigenvectors.nrows(), idx.len(), |r, c| e.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}
