//! Solve a multi-infeed case at rated orders and inspect the Jacobian.

use gridstrength::cli::resolve_case_path;
use gridstrength::netmodel::load_case;
use gridstrength::powerflow::{NewtonOptions, PowerFlowModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "dual".into());
    let case = load_case(resolve_case_path(name.as_ref()))?;
    let model = PowerFlowModel::from_case(&case)?;
    println!("calibrated emfs {:.5?}", model.network.emf.as_slice());

    let state = model.solve(&model.rated_orders, None, &NewtonOptions::default())?;
    for (i, bus) in model.buses.iter().enumerate() {
        let c = &state.converter_states[i];
        println!(
            "bus {bus}: U = {:.6}, delta = {:.3} deg, P = {:.2} MW, Q = {:.2} Mvar, mu = {:.2} deg",
            state.u[i],
            state.delta[i].to_degrees(),
            c.p * model.system_base_mva,
            c.q * model.system_base_mva,
            c.mu.to_degrees()
        );
    }
    println!("mismatch {:.2e} pu", model.mismatch(&state).amax());

    let j = model.assemble_jacobian(&state)?;
    println!("J_qv ={}", j.j_qv);
    println!("P_N rho T = {:.5?}, exact dQ/dU / U = {:.5?}", j.dc_diag.as_slice(), j.dc_q_exact.as_slice());
    let schur = j.schur_qv().expect("J_pd invertible away from the nose");
    println!(
        "det J = {:.6e}, det J_pd * det Schur = {:.6e}",
        j.full().determinant(),
        j.j_pdelta.determinant() * schur.determinant()
    );
    Ok(())
}
