//! Per-particle update rules.
//!
//! Boolean positions enter the velocity arithmetic as `true → 1.0`,
//! `false → 0.0`. Random numbers are drawn dimension by dimension in index
//! order; within a dimension the cognitive draw precedes the social draw.

use super::{GcState, Particle, SwarmConfig, SwarmError};
use crate::rng::UnitDraw;
use crate::wcnf::Assignment;

/// Lower bound on the guaranteed-convergence search radius.
pub const RHO_MIN: f64 = 1e-6;

#[inline]
fn as_real(bit: bool) -> f64 {
    if bit {
        1.0
    } else {
        0.0
    }
}

fn check_dims(expected: usize, found: usize) -> Result<(), SwarmError> {
    if expected == found {
        Ok(())
    } else {
        Err(SwarmError::Dimension { expected, found })
    }
}

/// Linearly decreasing inertia, held at `w_floor` once reached.
pub fn inertia_at(iteration: usize, config: &SwarmConfig) -> f64 {
    (config.w_start - config.w_decrement * iteration as f64).max(config.w_floor)
}

/// Logistic transfer function `1 / (1 + e^-v)`.
///
/// Uses `libm` so results do not depend on the platform's math library.
#[inline]
pub fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-v))
}

/// `clamp(w·v + c1·r1·(pbest − x) + c2·r2·(nbest − x), v_min, v_max)` per dimension.
pub fn velocity_update<D: UnitDraw + ?Sized>(
    particle: &Particle,
    neighbor_best: &Assignment,
    w: f64,
    config: &SwarmConfig,
    rng: &mut D,
) -> Result<Vec<f64>, SwarmError> {
    let n = particle.position.len();
    check_dims(n, particle.velocity.len())?;
    check_dims(n, particle.pbest_position.len())?;
    check_dims(n, neighbor_best.len())?;

    let x = particle.position.bits();
    let pb = particle.pbest_position.bits();
    let nb = neighbor_best.bits();
    Ok((0..n)
        .map(|i| {
            let r1 = rng.unit();
            let r2 = rng.unit();
            let xi = as_real(x[i]);
            let v = w * particle.velocity[i]
                + config.c1 * r1 * (as_real(pb[i]) - xi)
                + config.c2 * r2 * (as_real(nb[i]) - xi);
            v.clamp(config.v_min, config.v_max)
        })
        .collect())
}

/// Samples a fresh position: bit `i` is set iff a uniform draw is strictly
/// below `sigmoid(velocity[i])`.
pub fn position_update<D: UnitDraw + ?Sized>(velocity: &[f64], rng: &mut D) -> Assignment {
    velocity
        .iter()
        .map(|&v| rng.unit() < sigmoid(v))
        .collect::<Vec<_>>()
        .into()
}

/// Guaranteed-convergence velocity for the particle holding the global best:
/// `clamp(gbest − x + w·v + rho·(1 − 2r), v_min, v_max)` per dimension.
pub fn gc_velocity_update<D: UnitDraw + ?Sized>(
    best_particle: &Particle,
    global_best: &Assignment,
    w: f64,
    rho: f64,
    config: &SwarmConfig,
    rng: &mut D,
) -> Result<Vec<f64>, SwarmError> {
    let n = best_particle.position.len();
    check_dims(n, best_particle.velocity.len())?;
    check_dims(n, global_best.len())?;

    let x = best_particle.position.bits();
    let gb = global_best.bits();
    Ok((0..n)
        .map(|i| {
            let r = rng.unit();
            let v = as_real(gb[i]) - as_real(x[i])
                + w * best_particle.velocity[i]
                + rho * (1.0 - 2.0 * r);
            v.clamp(config.v_min, config.v_max)
        })
        .collect())
}

/// Success/failure bookkeeping for the search radius.
///
/// A run of `gc_success_threshold` consecutive improvements doubles `rho`;
/// a run of `gc_failure_threshold` consecutive misses halves it. `rho` stays
/// within `[RHO_MIN, v_max]`.
pub fn gc_adapt_rho(gc: &mut GcState, improved: bool, config: &SwarmConfig) {
    if improved {
        gc.successes += 1;
        gc.failures = 0;
    } else {
        gc.failures += 1;
        gc.successes = 0;
    }
    if gc.successes >= config.gc_success_threshold {
        gc.rho *= 2.0;
        gc.successes = 0;
    } else if gc.failures >= config.gc_failure_threshold {
        gc.rho *= 0.5;
        gc.failures = 0;
    }
    gc.rho = gc.rho.clamp(RHO_MIN, config.v_max);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{run_rng, ConstantDraw};
    use proptest::prelude::*;

    fn particle(x: &[bool], v: &[f64], pb: &[bool]) -> Particle {
        Particle {
            position: x.to_vec().into(),
            velocity: v.to_vec(),
            pbest_position: pb.to_vec().into(),
            pbest_fitness: 0,
        }
    }

    #[test]
    fn inertia_schedule() {
        let c = SwarmConfig::default();
        assert_eq!(inertia_at(0, &c), 0.9);
        assert!((inertia_at(100, &c) - 0.85).abs() < 1e-12);
        assert_eq!(inertia_at(1_000_000, &c), 0.4);
        // The linear part reaches the floor at iteration 1000.
        assert!((inertia_at(1000, &c) - 0.4).abs() < 1e-12);
        assert!(inertia_at(999, &c) > 0.4);
    }

    #[test]
    fn velocity_vanishes_at_consensus() {
        let c = SwarmConfig::default();
        let p = particle(&[true, false], &[0.0, 0.0], &[true, false]);
        let v = velocity_update(&p, &p.pbest_position, 0.9, &c, &mut run_rng(1)).unwrap();
        assert_eq!(v, vec![0.0, 0.0]);
    }

    #[test]
    fn velocity_clamps_both_signs() {
        let c = SwarmConfig::default();
        // 0.9·3.9 + 2·0.5·1 + 2·0.5·1 = 5.51 → 4
        let p = particle(&[false], &[3.9], &[true]);
        let v = velocity_update(&p, &vec![true].into(), 0.9, &c, &mut ConstantDraw(0.5)).unwrap();
        assert_eq!(v, vec![4.0]);
        let p = particle(&[true], &[-3.9], &[false]);
        let v = velocity_update(&p, &vec![false].into(), 0.9, &c, &mut ConstantDraw(0.5)).unwrap();
        assert_eq!(v, vec![-4.0]);
        // Unclamped interior value: 0.9·1 + 2·0.25·1 + 0 = 1.4
        let p = particle(&[false], &[1.0], &[true]);
        let v = velocity_update(&p, &vec![false].into(), 0.9, &c, &mut ConstantDraw(0.25)).unwrap();
        assert!((v[0] - 1.4).abs() < 1e-15);
    }

    #[test]
    fn velocity_rejects_mismatched_dimensions() {
        let c = SwarmConfig::default();
        let p = particle(&[false, true], &[0.0, 0.0], &[true, true]);
        assert_eq!(
            velocity_update(&p, &vec![true].into(), 0.9, &c, &mut ConstantDraw(0.5)),
            Err(SwarmError::Dimension {
                expected: 2,
                found: 1
            })
        );
        assert!(gc_velocity_update(&p, &vec![true].into(), 0.9, 1.0, &c, &mut ConstantDraw(0.5)).is_err());
    }

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        // Closed form: 1 / (1 + e^-4).
        let expected = 1.0 / (1.0 + (-4.0f64).exp());
        assert!((sigmoid(4.0) - expected).abs() < 1e-15);
        assert!((sigmoid(4.0) - 0.982_013_790_037_908_4).abs() < 1e-12);
        assert!((sigmoid(-4.0) - 0.017_986_209_962_091_56).abs() < 1e-12);
    }

    #[test]
    fn sigmoid_monotone_and_symmetric() {
        let grid: Vec<f64> = (0..1000).map(|k| -10.0 + 20.0 * k as f64 / 999.0).collect();
        for w in grid.windows(2) {
            assert!(sigmoid(w[1]) > sigmoid(w[0]));
        }
        for &v in &grid {
            assert!((sigmoid(v) + sigmoid(-v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn position_sampling_rates() {
        let mut rng = run_rng(5);
        let trials = 10_000;
        let saturated = position_update(&vec![1000.0; trials], &mut rng);
        let rate = saturated.bits().iter().filter(|&&b| b).count() as f64 / trials as f64;
        assert!(rate >= 0.999);
        let neutral = position_update(&vec![0.0; trials], &mut rng);
        let rate = neutral.bits().iter().filter(|&&b| b).count() as f64 / trials as f64;
        assert!((rate - 0.5).abs() <= 0.02, "rate {rate}");
    }

    #[test]
    fn position_sampling_is_deterministic() {
        let v: Vec<f64> = (0..64).map(|i| (i as f64 - 32.0) / 8.0).collect();
        assert_eq!(position_update(&v, &mut run_rng(9)), position_update(&v, &mut run_rng(9)));
        // Draws of exactly 0.5 never beat sigmoid(0) under the strict comparison.
        assert_eq!(position_update(&[0.0; 4], &mut ConstantDraw(0.5)), Assignment::all(false, 4));
    }

    #[test]
    fn gc_velocity_examples() {
        let c = SwarmConfig::default();
        let p = particle(&[true], &[0.0], &[true]);
        let v = gc_velocity_update(&p, &vec![true].into(), 0.9, 1.0, &c, &mut ConstantDraw(0.5)).unwrap();
        assert_eq!(v, vec![0.0]);
        // 1 − 0 + 0 + 1·(1 − 0.5) = 1.5
        let p = particle(&[false], &[0.0], &[true]);
        let v = gc_velocity_update(&p, &vec![true].into(), 0.9, 1.0, &c, &mut ConstantDraw(0.25)).unwrap();
        assert_eq!(v, vec![1.5]);
    }

    #[test]
    fn rho_threshold_traces() {
        let c = SwarmConfig::default();
        let mut gc = GcState::new(1.0);
        for _ in 0..14 {
            gc_adapt_rho(&mut gc, true, &c);
            assert_eq!(gc.rho, 1.0);
        }
        gc_adapt_rho(&mut gc, true, &c);
        assert_eq!((gc.rho, gc.successes), (2.0, 0));

        let mut gc = GcState::new(1.0);
        for _ in 0..5 {
            gc_adapt_rho(&mut gc, false, &c);
        }
        assert_eq!((gc.rho, gc.failures), (0.5, 0));

        let mut gc = GcState::new(1.0);
        for k in 0..100 {
            gc_adapt_rho(&mut gc, k % 2 == 0, &c);
        }
        assert_eq!(gc.rho, 1.0);
    }

    #[test]
    fn rho_stays_in_bounds() {
        let c = SwarmConfig::default();
        let mut gc = GcState::new(1.0);
        for _ in 0..1000 {
            gc_adapt_rho(&mut gc, true, &c);
        }
        assert_eq!(gc.rho, c.v_max);
        for _ in 0..1000 {
            gc_adapt_rho(&mut gc, false, &c);
        }
        assert_eq!(gc.rho, RHO_MIN);
    }

    proptest! {
        #[test]
        fn updates_respect_clamp(
            seed in any::<u64>(),
            v in proptest::collection::vec(-4.0f64..=4.0, 8),
            x in proptest::collection::vec(any::<bool>(), 8),
            pb in proptest::collection::vec(any::<bool>(), 8),
            nb in proptest::collection::vec(any::<bool>(), 8),
            w in 0.0f64..1.0,
            rho in RHO_MIN..4.0,
        ) {
            let c = SwarmConfig::default();
            let p = particle(&x, &v, &pb);
            let mut rng = run_rng(seed);
            for out in [
                velocity_update(&p, &nb.clone().into(), w, &c, &mut rng).unwrap(),
                gc_velocity_update(&p, &nb.into(), w, rho, &c, &mut rng).unwrap(),
            ] {
                prop_assert!(out.iter().all(|c| (-4.0..=4.0).contains(c)));
            }
        }
    }
}
