//! How far the thermal Gibbs state is from being stationary, as a function of
//! temperature.

use rotorbath::linear::gibbs_residual_scaling;

fn main() -> rotorbath::Result<()> {
    let s = gibbs_residual_scaling(1.0, &[5.0, 10.0, 20.0, 40.0])?;
    println!("   xi  l_max   ||D rho_G||_1");
    for ((xi, l), r) in s.xi.iter().zip(&s.l_max).zip(&s.residuals) {
        println!("{xi:5}  {l:5}   {r:.4e}");
    }
    if let Some(slope) = s.slope {
        println!("log-log slope: {slope:.3}");
    }
    Ok(())
}
