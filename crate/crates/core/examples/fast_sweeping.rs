//! Fast sweeping from a point source, compared with the exact distance.

use eikonal_twoscale::sweep::{fsm_solve, Field, SweepOptions, Wind};

fn main() {
    for nodes in [26, 51, 101, 201] {
        let h = 1.0 / (nodes - 1) as f64;
        let mut field = Field::new(nodes, nodes);
        field.fix(0, 0, 0.0, Wind::UNSET);
        let r = vec![1.0; nodes * nodes];
        let report = fsm_solve(&mut field, &r, h, SweepOptions::for_problem(2, 1.0));

        let mut l1 = 0.0;
        let mut worst = 0.0f64;
        for i in 0..nodes {
            for j in 0..nodes {
                let e = (field.get(i, j) - (i as f64 * h).hypot(j as f64 * h)).abs();
                l1 += e * h * h;
                worst = worst.max(e);
            }
        }
        println!("h = 1/{:<4} rounds {}  L1 {l1:.3e}  Linf {worst:.3e}", nodes - 1, report.rounds);
    }
}
