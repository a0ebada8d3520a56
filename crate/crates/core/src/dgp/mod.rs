//! Potential-outcomes data-generating processes and their exact algebra.

mod binary;
mod dist;
mod observed;
mod sample;
mod theta;

pub use binary::BinaryTheta;
pub use dist::{Atom, DiscreteDist};
pub use observed::ObservedLaw;
pub use sample::{sample, sample_with};
pub use theta::{ComplianceType, PotentialOutcomeLaws, Theta, TypeShares};
