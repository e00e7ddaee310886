//! Critical and boundary ratios of the single-infeed benchmark, closed form
//! against numeric search.

use std::time::Instant;

use gridstrength::boundary::{
    bscr_solve, cscr_closed_form, find_boundary_numeric, find_critical_numeric, rated_t,
    Aggregation, SearchOptions,
};
use gridstrength::cli::resolve_case_path;
use gridstrength::gscr::characteristic_delta;
use gridstrength::netmodel::load_case;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "cigre_sidc".into());
    let case = load_case(resolve_case_path(name.as_ref()))?;
    let params = case.lcc_params()?[0];
    let start = Instant::now();

    let t_n = rated_t(&params)?;
    println!("rated T = {t_n:.5}, CSCR = {:.4}", cscr_closed_form(t_n));
    let b = bscr_solve(&params)?;
    println!(
        "BSCR = {:.4} at U = {:.4} (without reactive terms {:.4})",
        b.scr, b.u, b.scr_reactive_free
    );

    let opts = SearchOptions::default();
    let cg = find_critical_numeric(&case, &opts)?;
    println!(
        "CgSCR = {:.4} at scale {:.5}, |lambda_max - 1| = {:.1e}, Delta(O_N) = {:.4}",
        cg.value,
        cg.scale_star,
        cg.condition_residual,
        characteristic_delta(1.0, t_n, cg.value)?
    );
    let bg = find_boundary_numeric(&case, Aggregation::Mean, &opts)?;
    println!(
        "BgSCR = {:.4} at scale {:.5}, mu = {:.3?} deg",
        bg.value, bg.scale_star, bg.per_converter_mu_deg
    );
    println!("elapsed {:.2?}", start.elapsed());
    Ok(())
}
