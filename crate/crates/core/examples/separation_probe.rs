use cnoise_core::gspace::{make_en, separation_report, EnStyle, GSpace};
use cnoise_core::Kernel;

fn main() {
    // Fixed-measure distance rows at mes = 0.5 for both alphas.
    for &alpha in &[1.5, 2.5] {
        let sp = GSpace::new(Kernel::new(alpha).unwrap());
        println!("alpha = {alpha}: rel_dist of g_n vs g at mes = 0.5");
        for p in [6usize, 8, 10, 12, 14, 16] {
            let set = make_en(1 << p, 0.5, EnStyle::Centered).unwrap();
            let row = sp.set_geometry(&set);
            println!("  n=2^{p:<2} rel_dist={:.4} norm_gn={:.4} overlap={:.4}", row.rel_dist, row.norm_gn, row.overlap);
        }
    }
    // Separation scan 2^6..2^16.
    let a = GSpace::new(Kernel::new(1.5).unwrap());
    let b = GSpace::new(Kernel::new(2.5).unwrap());
    let ns: Vec<usize> = (6..=16).map(|p| 1usize << p).collect();
    let rep = separation_report(&a, &b, &ns).unwrap();
    println!("separation alpha 1.5 vs 2.5 (mes tuned to 2.5):");
    for (ra, rb) in rep.rows_a.iter().zip(&rep.rows_b) {
        println!(
            "  n={:6} mes={:.4}  A: ovl={:.4}  B: ovl={:.4}",
            ra.n, ra.mes, ra.normalized_overlap, rb.normalized_overlap
        );
    }
    println!("floor_b={:.4} a_monotone_tail={} a_halved={}", rep.floor_b, rep.a_monotone_tail, rep.a_halved);
    let zn = GSpace::new(Kernel::new(2.0).unwrap());
    for p in [6usize, 10, 14] {
        let n = 1 << p;
        let lnn = (n as f64).ln();
        let st = zn.zn_stats(n, 1.0 / lnn).unwrap();
        println!("critical n=2^{p}: var_zn={:.4} corr={:.4}", st.var_zn, st.corr);
    }
}
