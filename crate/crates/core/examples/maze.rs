//! Curved barriers with a fast disk, plus a user-built obstacle course.
//! Regions cut off by barriers stay unreached for the first few iterations.

use eikonal_twoscale::boundary::BoundaryData;
use eikonal_twoscale::grid::GridSpec;
use eikonal_twoscale::slowness::{Shape, SlownessField, SlownessKind, BARRIER};
use eikonal_twoscale::twoscale::{run, Problem, SolverOptions};

fn solve(name: &str, kind: SlownessKind) -> eikonal_twoscale::Result<()> {
    let spec = GridSpec::new(2, 10, 30)?;
    let problem = Problem::new(spec, &SlownessField::from_catalog(&kind, 0)?, BoundaryData::point(0.0, 0.0))?;
    let options = SolverOptions { max_iters: 60, ..SolverOptions::default() };
    let (reference, _) = problem.reference(options.max_rounds);
    println!("{name}");
    let result = run(&problem, &options, Some(&reference.values), |rec, _, _, _| {
        let p = rec.patched_error.unwrap();
        let shown = if p.l1_rel.is_finite() { format!("{:.3e}", p.l1_rel) } else { "unreached nodes".into() };
        println!("  k={:<3} patched L1 {shown}", rec.k);
    })?;
    println!("  converged: {} after {} iterations", result.converged, result.iterations());
    Ok(())
}

fn main() -> eikonal_twoscale::Result<()> {
    solve("maze preset", SlownessKind::Maze)?;
    let course = SlownessKind::Obstacles {
        shapes: vec![
            Shape::Rect { x0: 0.2, x1: 0.25, y0: 0.0, y1: 0.8, value: BARRIER },
            Shape::Rect { x0: 0.55, x1: 0.6, y0: 0.2, y1: 1.0, value: BARRIER },
            Shape::Disk { cx: 0.8, cy: 0.3, r: 0.1, value: 0.2 },
        ],
        background: 1.0,
    };
    solve("two walls and a fast disk", course)
}
