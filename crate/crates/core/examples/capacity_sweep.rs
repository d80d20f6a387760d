//! Exact self-recall rate against the number of stored random patterns.
//! Recall holds up to roughly 0.15 N patterns and then collapses.
//!
//! ```bash
//! cargo run --release -p echomem --example capacity_sweep -- [neurons] [trials]
//! ```

use echomem::hopfield::{hebbian_train, run_to_convergence, BipolarPattern, DynamicsConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(100), |s| s.parse())?;
    let trials: usize = args.next().map_or(Ok(20), |s| s.parse())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = DynamicsConfig::default();

    println!("patterns,p_over_n,recall_rate");
    let step = (n / 20).max(1);
    for p in (step..=n / 2).step_by(step) {
        let mut recalled = 0;
        for _ in 0..trials {
            let pats: Vec<BipolarPattern> = (0..p)
                .map(|_| BipolarPattern::from_active(&(0..n).map(|_| rng.gen_bool(0.5)).collect::<Vec<_>>()))
                .collect::<Result<_, _>>()?;
            let w = hebbian_train(&pats)?;
            for x in &pats {
                let trace = run_to_convergence(&w, x, &cfg)?;
                recalled += usize::from(trace.converged && trace.final_state() == x);
            }
        }
        println!("{p},{:.3},{:.4}", p as f64 / n as f64, recalled as f64 / (p * trials) as f64);
    }
    Ok(())
}
