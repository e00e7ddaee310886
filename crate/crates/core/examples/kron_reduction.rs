//! Eliminate an internal hub bus and look at what the converters see.

use gridstrength::cli::resolve_case_path;
use gridstrength::netmodel::{build_susceptance, kron_reduce, load_case, ReducedNetwork};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let case = load_case(resolve_case_path("triple".as_ref()))?;
    let full = build_susceptance(&case);
    println!("full B on buses {:?}:\n{full}", full.buses());

    let reduced = kron_reduce(&full, &case.converter_buses())?;
    println!("reduced to {:?}:\n{reduced}", reduced.buses());

    let net = ReducedNetwork::from_case(&case)?;
    println!("source coupling C:{}", net.source_coupling);
    // Row sums of B + C vanish: a lossless network with no shunts.
    let sums = net.b.entries().column_sum().transpose() + net.source_coupling.column_sum();
    println!("row sums of B plus coupling: {:.2e}", sums.amax());
    Ok(())
}
