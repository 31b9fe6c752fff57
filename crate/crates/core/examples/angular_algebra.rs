//! Wigner 3j symbols, ladder coefficients and the commutator algebra of the
//! truncated angular-momentum and orientation operators.

use rotorbath::angular::{j_component_matrices, ladder_coefficients, orientation_vector_matrices, wigner3j_values, LinearBasis};

fn main() -> rotorbath::Result<()> {
    println!("(1 1 0; 0 0 0) = {:.6}", wigner3j_values(1, 1, 0, 0, 0, 0)?);
    println!("(2 2 2; 0 0 0) = {:.6}", wigner3j_values(2, 2, 2, 0, 0, 0)?);
    for (l, m) in [(1, 0), (3, 2), (5, -3)] {
        let (up, down) = ladder_coefficients(l, m)?;
        println!("J+ |{l},{m}> -> {up:.4}, J- |{l},{m}> -> {down:.4}");
    }

    let b = LinearBasis::new(8);
    let j = j_component_matrices(b);
    let m = orientation_vector_matrices(b);
    let i = rotorbath::C64::i();
    let defect = (j[0].commutator(&j[1]).entries() - j[2].entries() * i).map(|z| z.norm()).max();
    println!("max |[Jx, Jy] - i Jz| on l <= 8: {defect:.2e}");

    // M.M = 1 holds exactly except on the outermost shell.
    let inner = LinearBasis::new(7).dim();
    let mm: nalgebra::DMatrix<_> = m.iter().map(|c| c.entries() * c.entries()).sum();
    let worst = (0..inner).map(|k| (mm[(k, k)].re - 1.0).abs()).fold(0.0, f64::max);
    println!("max |<M.M> - 1| below the cutoff shell: {worst:.2e}");
    Ok(())
}
