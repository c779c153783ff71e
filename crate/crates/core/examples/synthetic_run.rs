use otcic::synthetic::{run_experiment, MeshKind, SyntheticConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    let runs = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(10);
    let mesh = args
        .get(3)
        .map(|s| s.parse().unwrap())
        .unwrap_or(MeshKind::Random);
    let cfg = SyntheticConfig {
        n,
        runs,
        mesh,
        ..Default::default()
    };
    let t = std::time::Instant::now();
    let rep = run_experiment(&cfg).unwrap();
    for r in &rep.per_run {
        println!(
            "run {:2}: ot {:.5} cic {:.5} ratio {:.1}",
            r.run,
            r.mad_ot,
            r.mad_cic,
            r.mad_cic / r.mad_ot
        );
    }
    println!(
        "mean ot {:.5} (sd {:.5}) cic {:.5} (sd {:.5}) in {:.1?}",
        rep.mad_ot,
        rep.sd_ot,
        rep.mad_cic,
        rep.sd_cic,
        t.elapsed()
    );
}
