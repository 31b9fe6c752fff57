//! Orientational decoherence rates for the standard and the
//! inversion-symmetric linear-rotor generators.

use nalgebra::Vector3;
use rotorbath::lindblad::propagate;
use rotorbath::linear::{build_linear_generator, initial_superposition, localization_rate, orientation_coherence, LinearRotorParams};

fn main() -> rotorbath::Result<()> {
    let p = LinearRotorParams::new(200.0, 1.0, 14)?;
    let north = Vector3::z();
    let tilt = |deg: f64| Vector3::new(deg.to_radians().sin(), 0.0, deg.to_radians().cos());
    println!("angle   F standard   F inversion-symmetric");
    for deg in [0.0, 30.0, 90.0, 150.0, 180.0] {
        let b = tilt(deg);
        let f = localization_rate(&north, &b, &p)?;
        let g = localization_rate(&north, &b, &p.with_inversion_symmetry(true))?;
        println!("{deg:5}   {f:10.2}   {g:10.2}");
    }

    let rho0 = initial_superposition(p.basis(), 0.4, 96)?;
    let times = [0.0, 1e-3, 2e-3, 5e-3];
    for inversion in [false, true] {
        let q = p.with_inversion_symmetry(inversion);
        let states = propagate(&build_linear_generator(&q)?, &rho0, 5e-3, &times)?;
        let c0 = orientation_coherence(&rho0, &north, &-north)?.norm();
        print!("inversion symmetric {inversion}: |<N|rho|S>| / initial =");
        for s in &states {
            print!(" {:.4}", orientation_coherence(s, &north, &-north)?.norm() / c0);
        }
        println!();
    }
    Ok(())
}
