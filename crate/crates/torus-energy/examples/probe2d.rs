use std::time::Instant;
use torus_energy::*;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let l: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(3);
    let starts: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(2);
    let max_iters: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(20000);
    let cap: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(16);
    let seed0: u64 = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(77);
    let k2 = FourierKernel::gaussian(1.0, &Cell::rect_2d(), cap).unwrap();
    let t0 = Instant::now();
    let opts = MinimizeOptions { starts, seed: seed0, max_iters, ..Default::default() };
    let v = verify_theorem_2d(&k2, l, &opts, 1e-4).unwrap();
    let total: usize = v.result.per_start.iter().map(|r| r.iterations).sum();
    let conv = v.result.per_start.iter().filter(|r| r.converged).count();
    println!(
        "2D L={} seed={} starts={}: defect={:.3e} recovered={} minsep={:.4} gap={:.3e} iters={} conv={}/{} [{:?}]",
        l, seed0, starts, v.sup_defect, v.recovered, v.min_separation.unwrap(),
        v.result.best_gap, total, conv, starts, t0.elapsed()
    );
}
