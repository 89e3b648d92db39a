//! Quasifree states: monomial expectations from determinants of the
//! two-point function, checked against a trace over the full Fock space.
//!
//! `cargo run --example wick_oracle`

use qboltz::fock::Ladder;
use qboltz::linalg::random_hermitian;
use qboltz::quasifree::{det8_prediction, wick_expectation, FockDensity, QuasifreeSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qboltz::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let spec = QuasifreeSpec::new(random_hermitian(&mut rng, 4, 1.5))?;
    let rho = FockDensity::gibbs_product_form(&spec)?;
    let nu = spec.two_point();
    println!("occupations of the eigen-orbitals: {:?}", spec.occupations());

    use Ladder::{Annihilate as A, Create as C};
    let exact = rho.expectation(&[C(0), C(2), A(3), A(1)]);
    let wick = wick_expectation(nu, &[0, 2], &[3, 1]);
    println!("<a+0 a+2 a3 a1>: trace {exact:.6}, determinant {wick:.6}");

    let (k, l) = ([0, 1, 2, 3], [3, 2, 1, 0]);
    let ops = [C(k[0]), C(k[1]), A(l[3]), A(l[2]), C(k[2]), C(k[3]), A(l[1]), A(l[0])];
    println!(
        "8-point: trace {:.6}, determinant {:.6}",
        rho.expectation(&ops),
        det8_prediction(nu, k, l)
    );
    Ok(())
}
