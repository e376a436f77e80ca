use cnoise_core::{gram, Kernel};
fn main() {
    let k = Kernel::new(2.0).unwrap();
    let rows = gram::defect_scan(&k, 1.0, &[8, 16, 32, 64, 128]).unwrap();
    for r in &rows {
        println!("N={:4} S_N={:.6e} inc={:?} min_eig={:.6}", r.n_trunc, r.defect, r.increment, r.min_eigenvalue);
    }
}
