//! First Dirichlet eigenvalue of the radial Laplacian on the unit ball under
//! grid refinement, with the observed convergence order.
//!
//! `cargo run --release --example grid_and_eigenvalue -- [dim]`

use bnlog::build_grid;

fn main() -> bnlog::Result<()> {
    let dims: Vec<usize> = match std::env::args().nth(1).and_then(|a| a.parse().ok()) {
        Some(d) => vec![d],
        None => vec![3, 4, 5],
    };
    for dim in dims {
        println!("N = {dim}");
        println!("{:>6} {:>20} {:>12}", "nodes", "lambda1", "order");
        let counts = [257, 513, 1025, 2049, 4097];
        let values = counts
            .iter()
            .map(|&n| build_grid(dim, 1.0, n)?.smallest_eigenvalue())
            .collect::<bnlog::Result<Vec<_>>>()?;
        for (k, (&n, &v)) in counts.iter().zip(&values).enumerate() {
            // Three successive halvings give the order without the exact value.
            let order = (k >= 2).then(|| {
                ((values[k - 2] - values[k - 1]) / (values[k - 1] - v)).log2()
            });
            match order {
                Some(p) => println!("{n:>6} {v:>20.12} {p:>12.4}"),
                None => println!("{n:>6} {v:>20.12} {:>12}", "-"),
            }
        }
        println!();
    }
    Ok(())
}
