//! Rauzy diagrams, mod-q Rauzy-Veech groups, Cayley graph spectra and
//! saddle connection counting on suspension translation surfaces.

pub mod cayley;
pub mod counting;
pub mod error;
pub mod exec;
pub mod geom;
pub mod homology;
pub mod intmat;
pub mod modq;
pub mod perm;
pub mod pipeline;
pub mod polygon;
pub mod rauzy;
pub mod saddle;
pub mod spectrum;
pub mod surface;

pub use error::{Error, Result};
pub use exec::Exec;
pub use perm::{Alphabet, Letter, MoveKind, PermutationPair};
pub use polygon::StratumSignature;
pub use rauzy::{RauzyArrow, RauzyClass};
