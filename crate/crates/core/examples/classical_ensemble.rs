//! Langevin ensemble of classical linear rotors and the quantum relaxation of
//! the mean squared angular momentum.

use rotorbath::classical::{run_linear_ensemble, LinearEnsembleConfig};

fn main() -> rotorbath::Result<()> {
    let config = LinearEnsembleConfig { trajectories: 4000, t_final: 3.0, dt_output: 0.5, ..LinearEnsembleConfig::default() };
    let series = run_linear_ensemble(&config)?;
    let (xi, gamma) = (config.xi, config.gamma);
    let j0 = config.j0 * config.j0;
    println!("    t   <J^2> classical       quantum");
    for m in &series {
        let quantum = xi + (j0 - xi) * (-2.0 * gamma * m.time).exp();
        println!("{:5.2}  {:8.3} +- {:5.3}   {:8.3}", m.time, m.j_squared, m.j_squared_se, quantum);
    }
    let last = series.last().expect("non-empty series");
    println!("energy / kT at the end: {:.3}", last.energy / (xi / 2.0));
    Ok(())
}
