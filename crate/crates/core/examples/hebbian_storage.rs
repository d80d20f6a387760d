//! Store bipolar patterns with the Hebbian rule and look at the weights and
//! energies they produce.
//!
//! ```bash
//! cargo run -p echomem --example hebbian_storage
//! ```

use echomem::hopfield::{energy, hebbian_train, raw_outer_product, BipolarPattern};

fn main() -> echomem::Result<()> {
    let x = BipolarPattern::new(vec![1, 1, -1, 1, -1, -1, 1])?;
    println!("pattern {x}\n\nouter product x x^T:");
    for row in raw_outer_product(&x) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>3}")).collect();
        println!("{}", cells.join(""));
    }

    let w = hebbian_train(std::slice::from_ref(&x))?;
    println!("\nweights (1/N, zero diagonal):");
    for i in 0..w.dim() {
        let cells: Vec<String> = w.row(i).iter().map(|v| format!("{v:>7.3}")).collect();
        println!("{}", cells.join(""));
    }
    println!("\nE(x)  = {:.4}", energy(&w, &x, None)?);
    println!("E(-x) = {:.4}", energy(&w, &-&x, None)?);

    // Flipping any single neuron raises the energy: x sits in a local minimum.
    for i in 0..x.len() {
        let mut v = x.values().to_vec();
        v[i] = -v[i];
        let flipped = BipolarPattern::new(v)?;
        println!("flip {i}: E = {:.4}", energy(&w, &flipped, None)?);
    }

    let a = BipolarPattern::new(vec![1, 1, 1, 1, -1, -1, -1, -1])?;
    let b = BipolarPattern::new(vec![1, -1, 1, -1, 1, -1, 1, -1])?;
    let w2 = hebbian_train(&[a.clone(), b.clone()])?;
    println!("\ntwo patterns, N = 8: E(a) = {:.4}, E(b) = {:.4}", energy(&w2, &a, None)?, energy(&w2, &b, None)?);
    Ok(())
}
