//! Point source in smooth oscillatory media: error history of the coarse
//! values and of the patched subdomain solutions.

use eikonal_twoscale::boundary::BoundaryData;
use eikonal_twoscale::grid::GridSpec;
use eikonal_twoscale::slowness::{SlownessField, SlownessKind};
use eikonal_twoscale::twoscale::{run, Problem, SolverOptions};

fn main() -> eikonal_twoscale::Result<()> {
    let media = [("slow waves", 0.99, 2.0), ("fast waves", 0.5, 20.0)];
    for (name, amplitude, frequency) in media {
        let spec = GridSpec::new(2, 10, 30)?;
        let slowness = SlownessField::from_catalog(&SlownessKind::Sine2d { amplitude, frequency }, 0)?;
        let problem = Problem::new(spec, &slowness, BoundaryData::point(0.0, 0.0))?;
        let options = SolverOptions { max_iters: 60, ..SolverOptions::default() };
        let (reference, _) = problem.reference(options.max_rounds);

        println!("{name}: r = 1 + {amplitude} sin({frequency}πx) sin({frequency}πy)");
        let result = run(&problem, &options, Some(&reference.values), |rec, _, _, _| {
            let (c, p) = (rec.coarse_error.unwrap(), rec.patched_error.unwrap());
            println!(
                "  k={:<3} coarse L1 {:.3e}  patched L1 {:.3e}  theta {:?}",
                rec.k, c.l1_rel, p.l1_rel, rec.max_theta_used
            );
        })?;
        println!("  converged: {} after {} iterations\n", result.converged, result.iterations());
    }
    Ok(())
}
