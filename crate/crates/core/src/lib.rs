//! Monodromy of local inverses of finite Blaschke products and the
//! dimension of the Dirichlet-space commutant of the multiplication operator.

pub mod blaschke;
pub mod classifier;
pub mod cli;
pub mod commutant;
pub mod config;
pub mod continuation;
pub mod error;
pub mod order5;
pub mod partition;
pub mod poly;
pub mod polyroots;
pub mod report;

pub type Cplx = num_complex::Complex64;

pub use blaschke::{BlaschkeProduct, RationalRep, Zero};
pub use classifier::{classify, classify_strict, ClassificationReport, CrossCheck};
pub use commutant::{BlockPointData, DirichletReport};
pub use config::ToolConfig;
pub use continuation::{LabeledFiber, MonodromyReport, PathSpec, Permutation, Surface};
pub use error::{Error, Result};
pub use partition::{Conditions, Partition};
pub use polyroots::{BranchAnalysis, BranchSet};
