use std::time::Instant;
use torus_energy::*;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seed0: u64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(2024);
    let k1 = FourierKernel::gaussian(1.0, &Cell::unit_1d(), 32).unwrap();
    for n in [4usize, 8, 12] {
        let t0 = Instant::now();
        let opts = MinimizeOptions { starts: 20, seed: seed0, ..Default::default() };
        let v = verify_theorem_1d(&k1, n, &opts, 1e-6).unwrap();
        let iters: usize = v.result.per_start.iter().map(|r| r.iterations).sum();
        let conv = v.result.per_start.iter().filter(|r| r.converged).count();
        println!(
            "1D N={:2} seed={}: defect={:.3e} recovered={} gap={:.3e} iters={} conv={}/20 [{:?}]",
            n, seed0, v.sup_defect, v.recovered, v.result.best_gap, iters, conv, t0.elapsed()
        );
    }
    // brute-force cross-check scale at N=3
    let opts = MinimizeOptions { starts: 8, seed: seed0, ..Default::default() };
    let r = minimize(&k1, MinimizeTarget::Free { n_points: 3 }, &opts).unwrap();
    println!("1D N=3 best_gap = {:.6e}", r.best_gap);
}
