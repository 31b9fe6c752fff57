//! Relaxation of an up/down orientation superposition of a linear rotor
//! towards its stationary state.

use rotorbath::linear::{fig2_experiment, Fig2Config};

fn main() -> rotorbath::Result<()> {
    let config = Fig2Config { t_final: 8.0, dt_output: 0.5, ..Fig2Config::default() };
    let r = fig2_experiment(&config)?;
    println!("    t      <H>    purity   entropy   S(rho|rho_eq)");
    for rec in &r.series.records {
        println!(
            "{:5.2}  {:7.4}  {:7.4}  {:7.4}   {:.3e}",
            rec.time,
            rec.energy,
            rec.purity,
            rec.entropy,
            rec.rel_entropy.unwrap_or(f64::NAN)
        );
    }
    for s in &r.snapshots {
        let shells: Vec<String> = s.shell_populations.iter().take(7).map(|p| format!("{p:.3}")).collect();
        println!("p_l at t = {}: {}", s.time, shells.join(" "));
    }
    println!("trace distance to the stationary state at t = {}: {:.2e}", config.t_final, r.final_distance);
    Ok(())
}
