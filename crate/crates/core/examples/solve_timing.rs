//! Times `solve_ot` on uniform random clouds: `solve_timing [n] [dim]`.

use std::time::Instant;

use otcic::{ot, PointCloud};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(1000);
    let dim: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut cloud = |shift: f64| {
        let coords = (0..n * dim).map(|_| rng.random::<f64>() + shift).collect();
        PointCloud::uniform_flat(dim, coords).unwrap()
    };
    let a = cloud(0.0);
    let b = cloud(0.3);
    let t = Instant::now();
    let plan = ot::solve_ot(&a, &b).unwrap();
    println!(
        "n={n} dim={dim} cost={:.6} permutation={} marginal_err={:e} time={:.2?}",
        plan.cost(),
        plan.is_permutation(),
        plan.marginal_error(),
        t.elapsed()
    );
}
