//! Critical and boundary gSCR of the dual-infeed case while converter 2's
//! rating varies relative to converter 1.

use gridstrength::boundary::{sweep_dual_infeed, Aggregation, SearchOptions};
use gridstrength::cli::resolve_case_path;
use gridstrength::netmodel::load_case;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let case = load_case(resolve_case_path("dual".as_ref()))?;
    let ratios: Vec<f64> = (0..=8).map(|k| 0.25 * 2f64.powf(k as f64 / 2.0)).collect();
    let rows = sweep_dual_infeed(&case, &ratios, Aggregation::Mean, &SearchOptions::default())?;

    println!("{:>7} {:>8} {:>8}", "P2/P1", "CgSCR", "BgSCR");
    for r in &rows {
        println!("{:>7.3} {:>8.4} {:>8.4}", r.ratio, r.cgscr, r.bgscr);
    }
    let spread = |v: Vec<f64>| {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
        (mean, 100.0 * (hi - lo) / mean)
    };
    let (cm, cs) = spread(rows.iter().map(|r| r.cgscr).collect());
    let (bm, bs) = spread(rows.iter().map(|r| r.bgscr).collect());
    println!("CgSCR mean {cm:.4}, spread {cs:.2}%");
    println!("BgSCR mean {bm:.4}, spread {bs:.2}%");
    Ok(())
}
