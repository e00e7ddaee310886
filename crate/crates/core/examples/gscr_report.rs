//! Spectrum of the extended Jacobian, gSCR and strength class of a case.
//!
//! cargo run --example gscr_report -- [case]

use gridstrength::cli::resolve_case_path;
use gridstrength::gscr::{analyze_case, factorization_check, case_jacobian, Thresholds};
use gridstrength::netmodel::load_case;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "triple".into());
    let case = load_case(resolve_case_path(name.as_ref()))?;
    let report = analyze_case(&case, Thresholds::default())?;

    println!("case {} on buses {:?}", report.case, report.buses);
    for (k, l) in report.eigenvalues.iter().enumerate() {
        println!("  lambda_{} = {l:.6}", k + 1);
    }
    println!("gSCR = {:.6} -> {:?}", report.gscr, report.class);
    println!("Perron vector {:.4?}", report.perron_vector);
    let l2 = &report.lemma2;
    println!(
        "positive: {}, simple: {} (relative gap {:.3e}), Perron positive: {}",
        l2.positive,
        l2.simple,
        l2.relative_gap.unwrap_or(f64::NAN),
        l2.perron_positive
    );

    // The characteristic determinant splits into one factor per eigenvalue.
    let j = case_jacobian(&case)?;
    let f = factorization_check(&j, 1.0, 1.5)?;
    println!("det = {:.6e}, product = {:.6e}, residual {:.1e}", f.determinant, f.product, f.residual);
    Ok(())
}
