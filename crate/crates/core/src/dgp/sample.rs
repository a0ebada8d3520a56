use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::theta::{ComplianceType, Theta};
use crate::data::{Observation, SampleData};
use crate::error::{LateError, Result};
use crate::Scalar;

/// Draws `n` iid observations from `theta`, deterministically given `seed`.
pub fn sample<T: Scalar>(theta: &Theta<T>, n: usize, seed: u64) -> Result<SampleData<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(theta, n, &mut rng)
}

pub fn sample_with<T: Scalar, R: Rng + ?Sized>(
    theta: &Theta<T>,
    n: usize,
    rng: &mut R,
) -> Result<SampleData<T>> {
    if n == 0 {
        return Err(LateError::InvalidArgument("sample size must be >= 1".into()));
    }
    let pz = theta.instrument_prob().as_f64();
    let shares = theta.shares();
    let cumulative = {
        let a = shares.always_taker.as_f64();
        let b = a + shares.complier.as_f64();
        let c = b + shares.defier.as_f64();
        [a, b, c]
    };
    let rows = (0..n)
        .map(|_| {
            let z = rng.random::<f64>() < pz;
            let u = rng.random::<f64>();
            let ty = match cumulative.iter().position(|&edge| u < edge) {
                Some(0) => ComplianceType::AlwaysTaker,
                Some(1) => ComplianceType::Complier,
                Some(2) => ComplianceType::Defier,
                _ => ComplianceType::NeverTaker,
            };
            let d = ty.treatment(z);
            let law = if d {
                theta.treated_law(ty)
            } else {
                theta.untreated_law(ty)
            };
            Observation::new(law.draw(rng), d, z)
        })
        .collect();
    SampleData::new(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::{DiscreteDist, PotentialOutcomeLaws, TypeShares};

    #[test]
    fn all_always_takers_with_point_mass() {
        let mut laws: [PotentialOutcomeLaws; 4] =
            std::array::from_fn(|_| PotentialOutcomeLaws::constant(0.0));
        laws[0] = PotentialOutcomeLaws::new(DiscreteDist::point(1.0), DiscreteDist::point(0.0));
        let theta = Theta::new(TypeShares::new(1.0, 0.0, 0.0).unwrap(), 0.5, 1.0, laws).unwrap();
        let data = sample(&theta, 500, 3).unwrap();
        assert!(data.rows().iter().all(|r| r.y == 1.0 && r.d));
    }

    #[test]
    fn same_seed_same_data() {
        let laws = std::array::from_fn(|i| {
            PotentialOutcomeLaws::new(
                DiscreteDist::uniform(&[0.0, i as f64 * 0.1]).unwrap(),
                DiscreteDist::point(0.0),
            )
        });
        let theta = Theta::new(TypeShares::new(0.2, 0.3, 0.1).unwrap(), 0.5, 1.0, laws).unwrap();
        assert_eq!(sample(&theta, 200, 11).unwrap(), sample(&theta, 200, 11).unwrap());
        assert_ne!(sample(&theta, 200, 11).unwrap(), sample(&theta, 200, 12).unwrap());
        assert!(sample(&theta, 0, 1).is_err());
    }
}
