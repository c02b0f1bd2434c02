//! Two-scale solve of a 1D problem with a sharp slowness bump and zero data
//! at both ends.

use eikonal_twoscale::boundary::{BoundaryData, EdgeValue};
use eikonal_twoscale::grid::GridSpec;
use eikonal_twoscale::slowness::{SlownessField, SlownessKind};
use eikonal_twoscale::twoscale::{run, Problem, SolverOptions};

fn main() -> eikonal_twoscale::Result<()> {
    let spec = GridSpec::new(1, 10, 100)?;
    let slowness =
        SlownessField::from_catalog(&SlownessKind::Gauss1d { amplitude: 10.0, center: 0.75, width: 0.01 }, 0)?;
    let problem = Problem::new(spec, &slowness, BoundaryData::whole_boundary(EdgeValue::Zero))?;

    let options = SolverOptions::default();
    let (reference, _) = problem.reference(options.max_rounds);
    let result = run(&problem, &options, Some(&reference.values), |rec, coarse, _, _| {
        let e = rec.coarse_error.unwrap();
        let u: Vec<String> = coarse.values.iter().map(|v| format!("{v:.4}")).collect();
        println!("k={}  Linf {:.3e}  U = [{}]", rec.k, e.linf, u.join(" "));
    })?;
    println!("converged: {} after {} iterations", result.converged, result.iterations());
    Ok(())
}
