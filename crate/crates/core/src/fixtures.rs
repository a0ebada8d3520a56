//! Seeded generators of random processes and a built-in observationally
//! equivalent pair, shared by tests, examples and the command-line tool.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adversarial::{forge_continuous, ForgeConfig};
use crate::dgp::{BinaryTheta, DiscreteDist, PotentialOutcomeLaws, Theta, TypeShares};

fn between<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Random law with `1..=max_atoms` atoms in `[lo, hi]`.
pub fn random_dist<R: Rng + ?Sized>(rng: &mut R, max_atoms: usize, lo: f64, hi: f64) -> DiscreteDist {
    let count = rng.random_range(1..=max_atoms.max(1));
    let weights: Vec<f64> = (0..count).map(|_| between(rng, 0.05, 1.0)).collect();
    let total: f64 = weights.iter().sum();
    DiscreteDist::new(
        weights
            .iter()
            .map(|w| (between(rng, lo, hi), w / total))
            .collect::<Vec<_>>(),
    )
    .expect("normalized weights")
}

/// Random type shares. With probability 1/4 one of the four shares is zero,
/// so empty observable cells and single-type mixtures are exercised.
pub fn random_shares<R: Rng + ?Sized>(rng: &mut R) -> TypeShares {
    let mut w: [f64; 4] = std::array::from_fn(|_| between(rng, 0.02, 1.0));
    if rng.random_range(0..4) == 0 {
        w[rng.random_range(0..4)] = 0.0;
    }
    let total: f64 = w.iter().sum();
    TypeShares::new(w[0] / total, w[1] / total, w[2] / total).expect("normalized shares")
}

/// Random process on `[-1, 1]` with at most `max_atoms` atoms per law.
pub fn random_theta<R: Rng + ?Sized>(rng: &mut R, max_atoms: usize) -> Theta {
    let shares = random_shares(rng);
    let laws = std::array::from_fn(|_| {
        PotentialOutcomeLaws::new(
            random_dist(rng, max_atoms, -1.0, 1.0),
            random_dist(rng, max_atoms, -1.0, 1.0),
        )
    });
    Theta::new(shares, between(rng, 0.2, 0.8), 1.0, laws).expect("valid random process")
}

pub fn random_binary_theta<R: Rng + ?Sized>(rng: &mut R) -> BinaryTheta {
    let shares = random_shares(rng);
    BinaryTheta::new(
        shares,
        between(rng, 0.2, 0.8),
        std::array::from_fn(|_| rng.random::<f64>()),
        std::array::from_fn(|_| rng.random::<f64>()),
    )
    .expect("valid random binary process")
}

/// Random no-defier binary process with `k1 > k2` and complier LATE `beta`.
pub fn random_binary_no_defier<R: Rng + ?Sized>(rng: &mut R) -> BinaryTheta {
    let k2 = between(rng, 0.0, 0.6);
    let k1 = between(rng, k2 + 0.05, 0.95);
    let t10 = rng.random::<f64>();
    let r10 = rng.random::<f64>();
    BinaryTheta::new(
        TypeShares::from_take_up(k1, k2, 0.0).expect("ordered take-up"),
        between(rng, 0.2, 0.8),
        [rng.random::<f64>(), r10, 0.0, 0.0],
        [0.0, t10, 0.0, rng.random::<f64>()],
    )
    .expect("valid binary process")
}

/// Random no-defier process with negative complier LATE that meets every
/// precondition of the continuous forge under the returned configuration.
pub fn random_forgeable<R: Rng + ?Sized>(rng: &mut R, max_atoms: usize) -> (Theta, ForgeConfig) {
    let k2 = between(rng, 0.15, 0.4);
    let k1 = k2 + between(rng, 0.15, 0.4);
    let eps1 = between(rng, 0.1, 0.4);
    let limit = eps1 * k2.min(1.0 - k1).min(k1 - k2);
    let eta = between(rng, 0.2, 0.95) * limit;
    let eps2 = between(rng, 0.2, 0.5);
    // 3 |beta| / eta < eps2 / (k1 - k2)
    let beta = -between(rng, 0.05, 0.95) * eps2 * eta / (3.0 * (k1 - k2));

    // Always-taker outcomes sit high and never-taker outcomes low so that the
    // quantile gap exceeds eps2 whatever the atoms.
    let f11 = random_dist(rng, max_atoms, 0.3, 1.0);
    let g00 = random_dist(rng, max_atoms, -1.0, -0.3);
    let g10 = random_dist(rng, max_atoms, -0.5, 0.5);
    let f10 = DiscreteDist::new(g10.atoms().iter().map(|a| (a.location + beta, a.mass)))
        .expect("shifted law");
    let laws = [
        PotentialOutcomeLaws::new(f11, random_dist(rng, max_atoms, -1.0, 1.0)),
        PotentialOutcomeLaws::new(f10, g10),
        PotentialOutcomeLaws::new(
            random_dist(rng, max_atoms, -1.0, 1.0),
            random_dist(rng, max_atoms, -1.0, 1.0),
        ),
        PotentialOutcomeLaws::new(random_dist(rng, max_atoms, -1.0, 1.0), g00),
    ];
    let theta = Theta::new(
        TypeShares::from_take_up(k1, k2, 0.0).expect("ordered take-up"),
        between(rng, 0.2, 0.8),
        1.0,
        laws,
    )
    .expect("valid process");
    let config = ForgeConfig::new(eps1, eps2, 1.0, eta)
        .and_then(|c| c.with_delta_rule(between(rng, 0.05, 0.95)))
        .expect("valid configuration");
    (theta, config)
}

/// Deterministic set of small processes (at most four atoms per law) used
/// to check the observable law against full enumeration.
pub fn small_theta_set() -> Vec<Theta> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let mut set: Vec<Theta> = (0..200).map(|_| random_theta(&mut rng, 4)).collect();
    let (base, twin) = builtin_twin_pair();
    set.push(base);
    set.push(twin);
    // Degenerate shares: a single type, and no never-takers.
    for shares in [
        TypeShares::new(1.0, 0.0, 0.0).unwrap(),
        TypeShares::new(0.0, 1.0, 0.0).unwrap(),
        TypeShares::new(0.0, 0.0, 1.0).unwrap(),
        TypeShares::new(0.0, 0.0, 0.0).unwrap(),
        TypeShares::new(0.25, 0.5, 0.25).unwrap(),
    ] {
        let laws = std::array::from_fn(|_| {
            PotentialOutcomeLaws::new(
                random_dist(&mut rng, 4, -1.0, 1.0),
                random_dist(&mut rng, 4, -1.0, 1.0),
            )
        });
        set.push(Theta::new(shares, 0.5, 1.0, laws).unwrap());
    }
    set
}

/// Configuration under which [`builtin_base`] is forged.
pub fn builtin_forge_config() -> ForgeConfig {
    ForgeConfig::new(0.3, 0.3, 1.0, 0.05).expect("valid configuration")
}

/// No-defier process with `k1 = 0.5`, `k2 = 0.3` and complier LATE `-0.01`.
pub fn builtin_base() -> Theta {
    let spread = DiscreteDist::uniform(&[-0.9, -0.3, 0.3, 0.9]).unwrap();
    let g10 = DiscreteDist::uniform(&[-0.5, 0.5]).unwrap();
    let f10 = DiscreteDist::uniform(&[-0.51, 0.49]).unwrap();
    let origin = DiscreteDist::point(0.0);
    Theta::new(
        TypeShares::from_take_up(0.5, 0.3, 0.0).unwrap(),
        0.5,
        1.0,
        [
            PotentialOutcomeLaws::new(spread.clone(), origin.clone()),
            PotentialOutcomeLaws::new(f10, g10),
            PotentialOutcomeLaws::new(origin.clone(), origin.clone()),
            PotentialOutcomeLaws::new(origin, spread),
        ],
    )
    .expect("valid built-in process")
}

/// [`builtin_base`] and its forged twin.
pub fn builtin_twin_pair() -> (Theta, Theta) {
    let base = builtin_base();
    let forged = forge_continuous(&base, &builtin_forge_config()).expect("built-in pair forges");
    (base, forged.twin)
}
