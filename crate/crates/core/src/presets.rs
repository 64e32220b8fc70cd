//! Built-in states and the three-level example channel.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::lincore::{ComplexMatrix, DensityMatrix, C64};
use crate::resource::{KrausElement, PioChannel};

fn real(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

fn product_pure(phi_a: &[C64], phi_b: &[C64]) -> DensityMatrix {
    DensityMatrix::product(
        &ComplexMatrix::projector(phi_a),
        &ComplexMatrix::projector(phi_b),
    )
    .expect("preset states are valid")
}

pub fn rho1_phi_a() -> Vec<C64> {
    real(&[FRAC_1_SQRT_2, 0.5, 0.5])
}

pub fn rho2_phi_a() -> Vec<C64> {
    real(&[1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0])
}

pub fn rho3_phi_a() -> Vec<C64> {
    let s = 1.0 / 3f64.sqrt();
    real(&[s, s, s])
}

/// `|phi_A><phi_A| (x) |phi_B><phi_B|` with
/// `phi_A = (1/sqrt2, 1/2, 1/2)`, `phi_B = (1/sqrt2, 0, 1/sqrt2)`.
pub fn rho1() -> DensityMatrix {
    product_pure(&rho1_phi_a(), &real(&[FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]))
}

/// `phi_A = (1/3, 2/3, 2/3)`, `phi_B = (1/sqrt2, 1/2, 1/2)`.
pub fn rho2() -> DensityMatrix {
    product_pure(&rho2_phi_a(), &real(&[FRAC_1_SQRT_2, 0.5, 0.5]))
}

/// `phi_A` uniform, `phi_B = (1/sqrt2, 0, 1/sqrt2)`.
pub fn rho3() -> DensityMatrix {
    product_pure(&rho3_phi_a(), &real(&[FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]))
}

/// Nine rank-one elements on three levels, in three harmonic triples.
/// Triple one lives on levels (2, 3) with phase derivative on level 2,
/// triples two and three on (1, 2) and (1, 3) with the derivative on level 1.
pub fn example1_channel() -> PioChannel {
    let a = (2.0f64 / 15.0).sqrt();
    let b = (1.0f64 / 5.0).sqrt();
    let w = |k: i32| C64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0);
    let z = C64::new(0.0, 0.0);
    let ra = C64::new(a, 0.0);
    let rb = C64::new(b, 0.0);

    let mut rows: Vec<(Vec<C64>, [f64; 3])> = Vec::new();
    for t in 0..3 {
        rows.push((vec![z, ra * w(-t), rb * w(t)], [0.0, 1.0, 0.0]));
    }
    for t in 0..3 {
        rows.push((vec![ra, rb * w(t), z], [1.0, 0.0, 0.0]));
    }
    for t in 0..3 {
        rows.push((vec![rb, z, ra * w(t)], [1.0, 0.0, 0.0]));
    }

    let elements = rows
        .into_iter()
        .map(|(coeffs, d)| KrausElement::new(vec![0; 3], coeffs, vec![0.0; 3], d.to_vec()))
        .collect();
    PioChannel::new(3, elements).expect("example channel is complete")
}
