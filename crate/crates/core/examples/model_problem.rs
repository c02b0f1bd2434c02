//! Strip model problem with exact distance data: how the choice of θ affects
//! stability. θ = 1 blows up, the estimated θ and the oracle window converge
//! one column per iteration.

use eikonal_twoscale::theta::model::{ModelProblem, ThetaPolicy};
use eikonal_twoscale::theta::ThetaParams;

fn main() -> eikonal_twoscale::Result<()> {
    let model = ModelProblem::new(20, 50)?;
    let fine = model.fine_reference();
    println!("fine vs exact, L1 per unit area: {:.3e}", model.discretization_error(&fine));

    let policies = [
        ("theta = 1", ThetaPolicy::Fixed { theta: 1.0 }),
        ("estimated", ThetaPolicy::Estimated { params: ThetaParams::default() }),
        ("oracle", ThetaPolicy::Oracle { fraction: 0.5 }),
    ];
    for (name, policy) in policies {
        let out = model.run(&policy, 12)?;
        println!("{name}");
        for it in &out.history {
            println!(
                "  k={:<3} Linf {:.3e}  settled {:.1e}  min upper bound {:.3e}",
                it.k, it.linf, it.settled_error, it.min_mbar
            );
        }
    }
    Ok(())
}
