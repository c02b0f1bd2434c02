//! Flop-count model: the iteration count below which the two-scale method
//! beats a serial fast sweep on the whole fine grid.

use eikonal_twoscale::metrics::FlopModel;

fn main() -> eikonal_twoscale::Result<()> {
    println!("   N     M  d   threshold");
    for (n, m, d) in [(10, 50, 2), (20, 100, 2), (14, 100, 2), (40, 100, 2), (10, 100, 1), (100, 1000, 1)] {
        let est = FlopModel::new(n, m, d, 10)?.speedup_threshold();
        println!("{n:>4} {m:>5} {d:>2} {:>11.2}", est.threshold);
    }
    Ok(())
}
