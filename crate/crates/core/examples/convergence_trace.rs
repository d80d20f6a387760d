//! Follow the synchronous recall of a corrupted pattern step by step, then a
//! start that never settles.
//!
//! ```bash
//! cargo run -p echomem --example convergence_trace -- [flips]
//! ```

use echomem::hopfield::{hebbian_train, match_state, run_to_convergence, BipolarPattern, DynamicsConfig};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn print_trace(stored: &[BipolarPattern], start: &BipolarPattern, cfg: &DynamicsConfig) -> echomem::Result<()> {
    let w = hebbian_train(stored)?;
    let trace = run_to_convergence(&w, start, cfg)?;
    for (i, (s, e)) in trace.states.iter().zip(&trace.energies).enumerate() {
        println!("iter {i:>3}  {s}  E={e:>9.4}");
    }
    let outcome = match_state(trace.final_state(), stored)?;
    println!("converged: {}  final: {:?}  overlap {:.3}\n", trace.converged, outcome.kind, outcome.overlap);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let flips: usize = std::env::args().nth(1).map_or(Ok(6), |s| s.parse())?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let stored: Vec<BipolarPattern> = (0..3)
        .map(|k| BipolarPattern::from_active(&(0..32).map(|i| (i * (k + 3)) % 7 < 3).collect::<Vec<_>>()))
        .collect::<Result<_, _>>()?;
    for (k, p) in stored.iter().enumerate() {
        println!("stored {k}   {p}");
    }

    let mut noisy = stored[1].values().to_vec();
    for i in sample(&mut rng, noisy.len(), flips) {
        noisy[i] = -noisy[i];
    }
    println!("\n{flips} neurons of pattern 1 flipped:");
    print_trace(&stored, &BipolarPattern::new(noisy)?, &DynamicsConfig::default())?;

    // With one stored pattern, a start orthogonal to it only sees the removed
    // self-coupling and flips back and forth until the iteration cap.
    let one = BipolarPattern::new(vec![1, 1, 1, 1])?;
    println!("start orthogonal to the single stored pattern {one}:");
    let capped = DynamicsConfig {
        max_iterations: 6,
        ..DynamicsConfig::default()
    };
    print_trace(std::slice::from_ref(&one), &BipolarPattern::new(vec![1, -1, 1, -1])?, &capped)?;
    Ok(())
}
