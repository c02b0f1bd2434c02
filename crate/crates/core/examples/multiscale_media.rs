//! Fine-scale media: a periodic grid of fast lines and random checkerboards.
//! Averages the error history over a few checkerboard draws.

use eikonal_twoscale::boundary::BoundaryData;
use eikonal_twoscale::grid::GridSpec;
use eikonal_twoscale::slowness::{SlownessField, SlownessKind};
use eikonal_twoscale::twoscale::{run, Problem, SolverOptions};

fn history(kind: &SlownessKind, seed: u64) -> eikonal_twoscale::Result<Vec<f64>> {
    let spec = GridSpec::new(2, 8, 21)?;
    let problem = Problem::new(spec, &SlownessField::from_catalog(kind, seed)?, BoundaryData::point(0.5, 0.5))?;
    let options = SolverOptions { max_iters: 40, ..SolverOptions::default() };
    let (reference, _) = problem.reference(options.max_rounds);
    let result = run(&problem, &options, Some(&reference.values), |_, _, _, _| {})?;
    Ok(result.history.iter().map(|r| r.coarse_error.unwrap().l1_rel).collect())
}

fn main() -> eikonal_twoscale::Result<()> {
    let h = 1.0 / (8.0 * 21.0);
    let eps = 7.0 * h;

    let squares = SlownessKind::Squares { eps, line_tol: Some(h / 2.0) };
    let curve = history(&squares, 0)?;
    println!("squares: {} iterations, final L1 {:.3e}", curve.len() - 1, curve.last().unwrap());

    let board = SlownessKind::Checkerboard { eps };
    let draws: Vec<Vec<f64>> = (0..4).map(|seed| history(&board, seed)).collect::<Result<_, _>>()?;
    let longest = draws.iter().map(Vec::len).max().unwrap();
    println!("checkerboard, mean over {} draws:", draws.len());
    for k in 0..longest {
        let mean = draws.iter().map(|d| d[k.min(d.len() - 1)]).sum::<f64>() / draws.len() as f64;
        println!("  k={k:<3} L1 {mean:.3e}");
    }
    Ok(())
}
