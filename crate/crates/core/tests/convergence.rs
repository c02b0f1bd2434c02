//! End-to-end properties of the two-scale iteration on small random problems.

use eikonal_twoscale::boundary::{BoundaryData, EdgeValue};
use eikonal_twoscale::grid::GridSpec;
use eikonal_twoscale::metrics::linf;
use eikonal_twoscale::slowness::{SlownessField, SlownessKind};
use eikonal_twoscale::twoscale::{run, Problem, SolverOptions};
use proptest::prelude::*;

fn converge(problem: &Problem) -> (bool, f64, f64) {
    let options = SolverOptions::default();
    let (reference, _) = problem.reference(options.max_rounds);
    let r = run(problem, &options, Some(&reference.values), |_, _, _, _| {}).unwrap();
    let patched = linf(&r.patched, &reference.values).unwrap();
    let coarse = linf(&r.coarse.values, &problem.on_skeleton(&reference.values)).unwrap();
    (r.converged, patched, coarse)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn smooth_media_converge_to_fine_solution(
        n in 2usize..5,
        m in 2usize..7,
        amplitude in 0.0f64..0.9,
        frequency in 0.5f64..4.0,
        sx in 0.0f64..1.0,
        sy in 0.0f64..1.0,
    ) {
        let spec = GridSpec::new(2, n, m).unwrap();
        let field = SlownessField::from_catalog(&SlownessKind::Sine2d { amplitude, frequency }, 0).unwrap();
        let problem = Problem::new(spec, &field, BoundaryData::point(sx, sy)).unwrap();
        let (converged, patched, coarse) = converge(&problem);
        prop_assert!(converged);
        prop_assert!(patched < 1e-10, "patched error {patched}");
        prop_assert!(coarse < 1e-10, "coarse error {coarse}");
    }

    #[test]
    fn one_dimensional_bumps_converge(
        n in 2usize..8,
        m in 2usize..20,
        amplitude in 0.0f64..20.0,
        center in 0.0f64..1.0,
        width in 0.01f64..0.3,
    ) {
        let spec = GridSpec::new(1, n, m).unwrap();
        let field = SlownessField::from_catalog(&SlownessKind::Gauss1d { amplitude, center, width }, 0).unwrap();
        let problem = Problem::new(spec, &field, BoundaryData::whole_boundary(EdgeValue::Zero)).unwrap();
        let (converged, patched, _) = converge(&problem);
        prop_assert!(converged);
        prop_assert!(patched < 1e-10, "patched error {patched}");
    }
}
