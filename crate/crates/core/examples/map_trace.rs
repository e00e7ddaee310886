//! Load every converter in proportion to its rating until the flow diverges.
//!
//! cargo run --example map_trace -- [case] [target gSCR]

use gridstrength::cli::resolve_case_path;
use gridstrength::gscr::case_gscr;
use gridstrength::netmodel::{load_case, scale_impedance};
use gridstrength::powerflow::{ContinuationOptions, PowerFlowModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "cigre_sidc".into());
    let target: f64 = args.next().map_or(Ok(3.0), |s| s.parse())?;
    let case = load_case(resolve_case_path(name.as_ref()))?;
    let case = scale_impedance(&case, case_gscr(&case)? / target)?;

    let model = PowerFlowModel::from_case(&case)?;
    let opts = ContinuationOptions { step: 0.05, lambda_tol: 1e-6, ..Default::default() };
    let r = model.trace_map(&opts)?;
    println!("{:>9} {:>8} {:>8} {:>10}", "lambda", "U_1", "mu_1", "min sv");
    for s in r.sorted_steps().iter().step_by(2) {
        println!(
            "{:>9.5} {:>8.4} {:>8.2} {:>10.4}",
            s.lambda,
            s.u[0],
            s.mu[0].to_degrees(),
            s.min_singular_value
        );
    }
    println!(
        "MAP at lambda = {:.6} (first failure {:.6}); P = {:.2?} MW, mu = {:.2?} deg",
        r.lambda_max,
        r.diverged_at,
        r.p_map_mw(model.system_base_mva),
        r.mu_at_map.iter().map(|m| m.to_degrees()).collect::<Vec<_>>()
    );
    Ok(())
}
