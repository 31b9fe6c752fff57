//! Stationary state of the linear rotor from the closed form, from the
//! ladder recursion and from the generator kernel.

use rotorbath::lindblad::{stationary_nullspace, trace_distance};
use rotorbath::linear::{build_linear_generator, shell_populations, stationary_closed_form, stationary_iterative, LinearRotorParams};

fn main() -> rotorbath::Result<()> {
    let p = LinearRotorParams::new(5.0, 1.0, 14)?;
    let closed = stationary_closed_form(&p)?;
    let iterative = stationary_iterative(&p)?;
    let kernel = stationary_nullspace(&build_linear_generator(&p)?)?;
    println!("closed vs iterative: {:.2e}", trace_distance(&closed, &iterative)?);
    println!("closed vs kernel:    {:.2e}", trace_distance(&closed, &kernel)?);

    let kt = p.kt();
    println!("  l   p_l (stationary)   p_l (Gibbs)");
    let gibbs: Vec<f64> = (0..=p.l_max).map(|l| (2 * l + 1) as f64 * (-((l * (l + 1)) as f64) / (2.0 * kt)).exp()).collect();
    let z: f64 = gibbs.iter().sum();
    for (l, q) in shell_populations(&closed, p.basis()).iter().enumerate().take(8) {
        println!("{l:>3}   {q:.6}           {:.6}", gibbs[l] / z);
    }
    Ok(())
}
