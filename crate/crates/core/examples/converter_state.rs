//! CP-CEA inverter operating points and voltage sensitivities.

use gridstrength::cli::resolve_case_path;
use gridstrength::converter::{k_of_c, sensitivity_t, solve_state};
use gridstrength::netmodel::load_case;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let case = load_case(resolve_case_path("cigre_sidc".as_ref()))?;
    let p = case.lcc_params()?[0];
    let order = p.rated_order()?;
    println!("rated order {order:.6} pu (line loss included)");

    println!("{:>6} {:>9} {:>9} {:>9} {:>8} {:>7} {:>7}", "U", "I_d", "P", "Q", "mu", "K(c)", "T");
    for k in 0..=8 {
        let u = 0.85 + 0.025 * k as f64;
        let s = solve_state(&p, u, order)?;
        let t = sensitivity_t(&s, &p)?;
        println!(
            "{u:>6.3} {:>9.5} {:>9.5} {:>9.5} {:>8.2} {:>7.3} {:>7.4}",
            s.i_d,
            s.p,
            s.q,
            s.mu.to_degrees(),
            k_of_c(s.c, p.gamma)?,
            t.t
        );
    }

    let rated = p.rated_state()?;
    let t = sensitivity_t(&rated, &p)?;
    println!(
        "rated: dtan(phi)/dU exact {:.5}, approximate {:.5}",
        t.dphi_du_exact, t.dphi_du_approx
    );
    Ok(())
}
