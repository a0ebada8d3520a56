//! Independent oracles for integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use late_phase::adversarial::DEFAULT_FLOOR;
use late_phase::dgp::{BinaryTheta, ComplianceType, Theta, TypeShares};

/// `(D(1), D(0))` for each type, written out rather than taken from the crate.
const TYPES: [(ComplianceType, bool, bool); 4] = [
    (ComplianceType::AlwaysTaker, true, true),
    (ComplianceType::Complier, true, false),
    (ComplianceType::Defier, false, true),
    (ComplianceType::NeverTaker, false, false),
];

/// Order-preserving map from `f64` to `u64`.
fn key(y: f64) -> u64 {
    let b = y.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

fn unkey(k: u64) -> f64 {
    f64::from_bits(if k >> 63 == 1 { k & !(1 << 63) } else { !k })
}

/// Joint law of the observables obtained by enumerating every
/// `(type, Y(1), Y(0), Z)` combination.
pub struct Enumerated {
    pub pz: f64,
    /// P(D = d, Z = z), indexed `[d][z]`.
    pub cell_mass: [[f64; 2]; 2],
    /// P(Y = y | D = d, Z = z) keyed by an order-preserving encoding of `y`.
    pub cells: [[BTreeMap<u64, f64>; 2]; 2],
}

impl Enumerated {
    pub fn k1(&self) -> f64 {
        self.cell_mass[1][1] / self.pz
    }

    pub fn k2(&self) -> f64 {
        self.cell_mass[1][0] / (1.0 - self.pz)
    }

    pub fn arm_mean(&self, z: usize) -> f64 {
        let arm = if z == 1 { self.pz } else { 1.0 - self.pz };
        (0..2)
            .map(|d| {
                self.cells[d][z]
                    .iter()
                    .map(|(y, p)| unkey(*y) * p)
                    .sum::<f64>()
                    * self.cell_mass[d][z]
            })
            .sum::<f64>()
            / arm
    }

    pub fn wald(&self) -> f64 {
        (self.arm_mean(1) - self.arm_mean(0)) / (self.k1() - self.k2())
    }
}

pub fn enumerate(theta: &Theta) -> Enumerated {
    let pz = theta.instrument_prob();
    let mut joint: [[BTreeMap<u64, f64>; 2]; 2] = Default::default();
    let mut cell_mass = [[0.0; 2]; 2];
    for (ty, d1, d0) in TYPES {
        let share = theta.shares().get(ty);
        if share == 0.0 {
            continue;
        }
        let laws = theta.laws(ty);
        for (z, pzv) in [(false, 1.0 - pz), (true, pz)] {
            let d = if z { d1 } else { d0 };
            for y1 in laws.treated.atoms() {
                for y0 in laws.untreated.atoms() {
                    let p = share * pzv * y1.mass * y0.mass;
                    let y = if d { y1.location } else { y0.location };
                    *joint[d as usize][z as usize].entry(key(y)).or_insert(0.0) += p;
                    cell_mass[d as usize][z as usize] += p;
                }
            }
        }
    }
    let mut cells = joint;
    for d in 0..2 {
        for z in 0..2 {
            let total = cell_mass[d][z];
            for p in cells[d][z].values_mut() {
                *p /= total;
            }
        }
    }
    Enumerated {
        pz,
        cell_mass,
        cells,
    }
}

/// E[Y(1) - Y(0)] over the atoms of one type, by brute force.
pub fn type_effect(theta: &Theta, ty: ComplianceType) -> f64 {
    let laws = theta.laws(ty);
    let mut total = 0.0;
    for y1 in laws.treated.atoms() {
        for y0 in laws.untreated.atoms() {
            total += (y1.location - y0.location) * y1.mass * y0.mass;
        }
    }
    total
}

/// Largest discrepancy between `observed_law` and the enumeration. Cells that
/// the enumeration leaves empty must be empty in the observed law.
pub fn observed_law_discrepancy(theta: &Theta) -> f64 {
    let law = theta.observed_law();
    let oracle = enumerate(theta);
    let mut worst = (law.k1 - oracle.k1()).abs().max((law.k2 - oracle.k2()).abs());
    if oracle.pz != law.instrument_prob {
        return f64::INFINITY;
    }
    for d in 0..2 {
        for z in 0..2 {
            match law.cell(d == 1, z == 1) {
                None => {
                    if oracle.cell_mass[d][z] > 0.0 {
                        return f64::INFINITY;
                    }
                }
                Some(dist) => {
                    if oracle.cell_mass[d][z] == 0.0 {
                        return f64::INFINITY;
                    }
                    let expected = &oracle.cells[d][z];
                    if dist.len() != expected.len() {
                        return f64::INFINITY;
                    }
                    for (atom, (y, p)) in dist.atoms().iter().zip(expected) {
                        worst = worst
                            .max((atom.location - unkey(*y)).abs())
                            .max((atom.mass - p).abs());
                    }
                }
            }
        }
    }
    worst
}

/// Smallest `t` among atom locations with CDF(t) >= eps, by linear scan.
pub fn scan_quantile(locations_masses: &[(f64, f64)], eps: f64) -> f64 {
    let mut cumulative = 0.0;
    for &(l, m) in locations_masses {
        cumulative += m;
        if cumulative >= eps {
            return l;
        }
    }
    locations_masses.last().unwrap().0
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn between(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// No-defier binary process with `beta < 0` on the dangerous side of the
/// interior rule, and an `eta` for which the interior forge must succeed.
pub fn interior_forgeable(rng: &mut ChaCha8Rng) -> (BinaryTheta, f64) {
    loop {
        let k2 = between(rng, 0.1, 0.5);
        let k1 = between(rng, k2 + 0.1, 0.9);
        let r11 = between(rng, 0.0, 1.0);
        let t00 = between(rng, 0.0, 1.0);
        let p10 = r11 * k2;
        let p01 = (1.0 - t00) * (1.0 - k1);
        if p10 < DEFAULT_FLOOR || p01 < DEFAULT_FLOOR {
            continue;
        }
        let cap = p10.min(p01).min(1.0 - k1);
        let beta = -(between(rng, 0.05, 0.95) * cap / (k1 - k2)).min(0.9);
        let eta = between(rng, -beta * (k1 - k2), cap);
        let t10 = between(rng, -beta, 1.0);
        let theta = BinaryTheta::new(
            TypeShares::from_take_up(k1, k2, 0.0).unwrap(),
            between(rng, 0.2, 0.8),
            [r11, t10 + beta, 0.0, 0.0],
            [0.0, t10, 0.0, t00],
        )
        .unwrap();
        return (theta, eta);
    }
}

/// No-defier binary process on the dangerous side of the one-sided rule with
/// `P(Y=D=1|Z=0) <= min(P(Y=D=0|Z=1), 1 - k1)`.
pub fn onesided_forgeable(rng: &mut ChaCha8Rng) -> BinaryTheta {
    loop {
        let k2 = between(rng, 0.005, 0.2);
        let k1 = between(rng, k2 + 0.05, 0.9);
        let r11 = between(rng, 0.2, 1.0);
        let t00 = between(rng, 0.0, 1.0);
        let p10 = r11 * k2;
        let p01 = (1.0 - t00) * (1.0 - k1);
        if p01 < DEFAULT_FLOOR || p10 > p01 || p10 > 1.0 - k1 {
            continue;
        }
        let beta = -(between(rng, 0.05, 1.0) * p10 / (k1 - k2)).min(0.9);
        let t10 = between(rng, -beta, 1.0);
        return BinaryTheta::new(
            TypeShares::from_take_up(k1, k2, 0.0).unwrap(),
            between(rng, 0.2, 0.8),
            [r11, t10 + beta, 0.0, 0.0],
            [0.0, t10, 0.0, t00],
        )
        .unwrap();
    }
}

/// Binary process with an arbitrary, mostly small, defier share.
pub fn binary_with_defiers(rng: &mut ChaCha8Rng) -> BinaryTheta {
    let c = between(rng, 0.0, 0.1);
    let a = between(rng, 0.0, 0.5);
    let b = between(rng, 0.05, 1.0 - a - c);
    BinaryTheta::new(
        TypeShares::new(a, b, c).unwrap(),
        between(rng, 0.2, 0.8),
        std::array::from_fn(|_| rng.random::<f64>()),
        std::array::from_fn(|_| rng.random::<f64>()),
    )
    .unwrap()
}
