//! Selective monotonicity of the searched lower bound under random channels.
//! Above two levels the search value is only a lower bound, so this is a
//! statistical check rather than a theorem.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pcfi::coherence::{coherence_search, SearchConfig};
use pcfi::lincore::{ComplexMatrix, DensityMatrix};
use pcfi::resource::apply_channel;
use pcfi::sample::{random_g_channel, random_state};

const PAIRS: u64 = 200;

#[test]
fn search_bound_monotone_on_average_three_levels() {
    let cfg = SearchConfig::default();
    let slack = 2.0 * cfg.step_tolerance * cfg.n_restarts as f64;
    let mut worst_selective = f64::NEG_INFINITY;
    let mut worst_mixed = f64::NEG_INFINITY;
    let mut strict = 0;
    let mut violations = Vec::new();
    for pair in 0..PAIRS {
        let mut rng = ChaCha8Rng::seed_from_u64(pair);
        let rho = random_state(3, 2, None, &mut rng);
        let ch = random_g_channel(3, &mut rng);
        let before = coherence_search(&rho, &cfg).unwrap().value;
        let (outs, probs) = apply_channel(&ch, &rho, rng.random::<f64>()).unwrap();
        let mut avg = 0.0;
        let mut mixed = ComplexMatrix::zeros(6, 6);
        for (out, p) in outs.iter().zip(&probs) {
            if let Some(s) = out {
                avg += p * coherence_search(s, &cfg).unwrap().value;
                mixed = &mixed + &s.matrix().scale_real(*p);
            }
        }
        let after_mixed = coherence_search(&DensityMatrix::new(mixed, 3, 2).unwrap(), &cfg).unwrap().value;
        if avg < before - 1e-6 {
            strict += 1;
        }
        worst_selective = worst_selective.max(avg - before);
        worst_mixed = worst_mixed.max(after_mixed - before);
        if avg > before + slack || after_mixed > before + slack {
            violations.push((pair, before, avg, after_mixed));
        }
    }
    println!("{strict} of {PAIRS} pairs strictly decrease");
    println!("worst selective excess {worst_selective:e}, worst mixed excess {worst_mixed:e}, slack {slack:e}");
    for v in &violations {
        println!("violation: pair {} before {:.6} selective {:.6} mixed {:.6}", v.0, v.1, v.2, v.3);
    }
    assert!(violations.is_empty(), "{} of {PAIRS} pairs violate monotonicity", violations.len());
}
