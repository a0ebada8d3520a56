//! Finite atomic outcome distributions.
//!
//! Every outcome law in the model (the treated and untreated potential-outcome
//! laws per compliance type, and the observed conditional laws) is a
//! [`DiscreteDist`]: a finite list of atoms with strictly increasing locations
//! and positive masses summing to one. Mixtures, truncations and quantiles are
//! then exact operations on atom lists.

use rand::Rng;

use crate::error::{LateError, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom<T> {
    pub location: T,
    pub mass: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist<T = f64> {
    atoms: Vec<Atom<T>>,
}

impl<T: Scalar> DiscreteDist<T> {
    /// Builds a distribution from `(location, mass)` pairs.
    ///
    /// Pairs are sorted by location, locations within the scalar tolerance are
    /// merged and zero masses dropped. Masses must be finite and non-negative
    /// and sum to one within tolerance.
    pub fn new<I>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (T, T)>,
    {
        let raw: Vec<Atom<T>> = atoms
            .into_iter()
            .map(|(location, mass)| Atom { location, mass })
            .collect();
        for atom in &raw {
            if !atom.location.is_finite() || !atom.mass.is_finite() {
                return Err(LateError::InvalidDistribution(format!(
                    "non-finite atom ({}, {})",
                    atom.location, atom.mass
                )));
            }
            if atom.mass < T::zero() {
                return Err(LateError::InvalidDistribution(format!(
                    "negative mass {} at {}",
                    atom.mass, atom.location
                )));
            }
        }
        let atoms = merge_sorted(raw);
        let total: T = atoms.iter().map(|a| a.mass).sum();
        if atoms.is_empty() || (total - T::one()).abs() > T::tolerance() {
            return Err(LateError::InvalidDistribution(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        Ok(Self { atoms })
    }

    pub fn point(location: T) -> Self {
        Self {
            atoms: vec![Atom {
                location,
                mass: T::one(),
            }],
        }
    }

    /// Two-point law on {0, 1} with mean `p`.
    pub fn bernoulli(p: T) -> Result<Self> {
        if !(T::zero()..=T::one()).contains(&p) {
            return Err(LateError::InvalidDistribution(format!(
                "Bernoulli mean {p} outside [0, 1]"
            )));
        }
        Self::new([(T::zero(), T::one() - p), (T::one(), p)])
    }

    /// Equal mass on each of the given locations.
    pub fn uniform(locations: &[T]) -> Result<Self> {
        if locations.is_empty() {
            return Err(LateError::InvalidDistribution("no locations".into()));
        }
        let mass = T::one() / T::from_usize(locations.len()).unwrap();
        Self::new(locations.iter().map(|&l| (l, mass)))
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mean(&self) -> T {
        self.atoms.iter().map(|a| a.location * a.mass).sum()
    }

    pub fn min_location(&self) -> T {
        self.atoms[0].location
    }

    pub fn max_location(&self) -> T {
        self.atoms[self.atoms.len() - 1].location
    }

    pub fn supported_within(&self, bound: T) -> bool {
        self.min_location() >= -bound && self.max_location() <= bound
    }

    /// P(Y <= y).
    pub fn cdf(&self, y: T) -> T {
        self.atoms
            .iter()
            .take_while(|a| a.location <= y)
            .map(|a| a.mass)
            .sum()
    }

    /// Smallest atom location `t` with `P(Y <= t) >= eps`.
    pub fn quantile(&self, eps: T) -> Result<T> {
        if !(eps > T::zero() && eps < T::one()) {
            return Err(LateError::InvalidArgument(format!(
                "quantile level {eps} outside (0, 1)"
            )));
        }
        let mut cumulative = T::zero();
        for atom in &self.atoms {
            cumulative += atom.mass;
            if cumulative >= eps {
                return Ok(atom.location);
            }
        }
        // Rounding can leave the running sum a hair below one.
        Ok(self.max_location())
    }

    /// Exact mixture `sum_i w_i * dist_i`. Weights must be non-negative and sum
    /// to one; zero-weight components contribute no atoms.
    pub fn mixture(components: &[(T, &DiscreteDist<T>)]) -> Result<Self> {
        let weight_sum: T = components.iter().map(|(w, _)| *w).sum();
        if components.iter().any(|(w, _)| *w < T::zero() || !w.is_finite()) {
            return Err(LateError::InvalidDistribution(
                "mixture weights must be non-negative".into(),
            ));
        }
        if (weight_sum - T::one()).abs() > T::tolerance() {
            return Err(LateError::InvalidDistribution(format!(
                "mixture weights sum to {weight_sum}"
            )));
        }
        let raw = components
            .iter()
            .filter(|(w, _)| *w > T::zero())
            .flat_map(|(w, d)| {
                d.atoms.iter().map(move |a| Atom {
                    location: a.location,
                    mass: *w * a.mass,
                })
            })
            .collect();
        Self::normalized(merge_sorted(raw))
    }

    /// Atom-wise affine combination whose weights may be negative.
    ///
    /// Resulting masses in `[-tol, 0)` are clamped to zero and the result is
    /// renormalized; any mass below `-tol` is reported as
    /// [`LateError::ConstructionDegenerate`].
    pub fn signed_combination(terms: &[(T, &DiscreteDist<T>)]) -> Result<Self> {
        let tol = T::tolerance();
        let weight_sum: T = terms.iter().map(|(w, _)| *w).sum();
        if (weight_sum - T::one()).abs() > tol {
            return Err(LateError::InvalidDistribution(format!(
                "combination weights sum to {weight_sum}"
            )));
        }
        let raw: Vec<Atom<T>> = terms
            .iter()
            .filter(|(w, _)| *w != T::zero())
            .flat_map(|(w, d)| {
                d.atoms.iter().map(move |a| Atom {
                    location: a.location,
                    mass: *w * a.mass,
                })
            })
            .collect();
        let mut merged = merge_signed(raw);
        for atom in &mut merged {
            if atom.mass < -tol {
                return Err(LateError::ConstructionDegenerate(format!(
                    "negative mass {} at location {}",
                    atom.mass, atom.location
                )));
            }
            if atom.mass < T::zero() {
                atom.mass = T::zero();
            }
        }
        merged.retain(|a| a.mass > T::zero());
        Self::normalized(merged)
    }

    /// Law of `Y` given `Y > threshold`.
    pub fn condition_above(&self, threshold: T) -> Result<Self> {
        let kept: Vec<Atom<T>> = self
            .atoms
            .iter()
            .copied()
            .filter(|a| a.location > threshold)
            .collect();
        Self::renormalized_subset(kept, "Y > threshold")
    }

    /// Law of `Y` given `Y <= threshold`.
    pub fn condition_at_most(&self, threshold: T) -> Result<Self> {
        let kept: Vec<Atom<T>> = self
            .atoms
            .iter()
            .copied()
            .filter(|a| a.location <= threshold)
            .collect();
        Self::renormalized_subset(kept, "Y <= threshold")
    }

    /// Law of `-Y`.
    pub fn negated(&self) -> Self {
        let atoms = self
            .atoms
            .iter()
            .rev()
            .map(|a| Atom {
                location: -a.location,
                mass: a.mass,
            })
            .collect();
        Self { atoms }
    }

    /// Law of `1{Y >= threshold}`.
    pub fn dichotomized(&self, threshold: T) -> Self {
        let p: T = self
            .atoms
            .iter()
            .filter(|a| a.location >= threshold)
            .map(|a| a.mass)
            .sum();
        let p = p.max(T::zero()).min(T::one());
        Self::bernoulli(p).expect("probability in [0, 1]")
    }

    /// Total-variation distance, matching atoms whose locations agree within
    /// tolerance.
    pub fn total_variation(&self, other: &DiscreteDist<T>) -> T {
        let tol = T::tolerance();
        let (mut i, mut j) = (0, 0);
        let mut acc = T::zero();
        let (a, b) = (&self.atoms, &other.atoms);
        while i < a.len() || j < b.len() {
            match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) if (x.location - y.location).abs() <= tol => {
                    acc += (x.mass - y.mass).abs();
                    i += 1;
                    j += 1;
                }
                (Some(x), Some(y)) if x.location < y.location => {
                    acc += x.mass;
                    i += 1;
                }
                (Some(_), Some(y)) => {
                    acc += y.mass;
                    j += 1;
                }
                (Some(x), None) => {
                    acc += x.mass;
                    i += 1;
                }
                (None, Some(y)) => {
                    acc += y.mass;
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        acc / T::two()
    }

    /// Draws one value. `u` must be uniform on [0, 1).
    pub fn draw_with(&self, u: T) -> T {
        let mut cumulative = T::zero();
        for atom in &self.atoms {
            cumulative += atom.mass;
            if u < cumulative {
                return atom.location;
            }
        }
        self.max_location()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.draw_with(T::lit(rng.random::<f64>()))
    }

    fn renormalized_subset(kept: Vec<Atom<T>>, what: &str) -> Result<Self> {
        let total: T = kept.iter().map(|a| a.mass).sum();
        if kept.is_empty() || total <= T::zero() {
            return Err(LateError::InvalidDistribution(format!(
                "conditioning event {what} has probability zero"
            )));
        }
        let atoms = kept
            .into_iter()
            .map(|a| Atom {
                location: a.location,
                mass: a.mass / total,
            })
            .collect();
        Ok(Self { atoms })
    }

    fn normalized(atoms: Vec<Atom<T>>) -> Result<Self> {
        let total: T = atoms.iter().map(|a| a.mass).sum();
        // Clamping and float accumulation can move the total by a few ulps per atom.
        let slack = T::tolerance() * T::from_usize(atoms.len().max(1)).unwrap();
        if atoms.is_empty() || (total - T::one()).abs() > slack {
            return Err(LateError::InvalidDistribution(format!(
                "combined masses sum to {total}"
            )));
        }
        let atoms = atoms
            .into_iter()
            .map(|a| Atom {
                location: a.location,
                mass: a.mass / total,
            })
            .collect();
        Ok(Self { atoms })
    }
}

fn sort_by_location<T: Scalar>(atoms: &mut [Atom<T>]) {
    atoms.sort_by(|a, b| a.location.partial_cmp(&b.location).expect("finite locations"));
}

/// Sorts and merges atoms closer than tolerance, dropping non-positive masses.
fn merge_sorted<T: Scalar>(mut atoms: Vec<Atom<T>>) -> Vec<Atom<T>> {
    let mut merged = merge_signed_inner(&mut atoms);
    merged.retain(|a| a.mass > T::zero());
    merged
}

/// Sorts and merges atoms closer than tolerance, keeping signed masses.
fn merge_signed<T: Scalar>(mut atoms: Vec<Atom<T>>) -> Vec<Atom<T>> {
    merge_signed_inner(&mut atoms)
}

fn merge_signed_inner<T: Scalar>(atoms: &mut [Atom<T>]) -> Vec<Atom<T>> {
    sort_by_location(atoms);
    let tol = T::tolerance();
    let mut out: Vec<Atom<T>> = Vec::with_capacity(atoms.len());
    for atom in atoms.iter() {
        match out.last_mut() {
            Some(last) if atom.location - last.location <= tol => last.mass += atom.mass,
            _ => out.push(*atom),
        }
    }
    out
}
