//! Hyperbolic Voronoi diagrams of point sites in the Klein disk.
//!
//! Sites are lifted to tangent planes of the hemisphere `y = sqrt(1 - |x|^2)`;
//! the order-k diagram is the power diagram of the balls obtained from every
//! k-subset of sites, clipped to a disk of radius `l <= 1`. A brute-force
//! oracle checks constructed diagrams against direct distance evaluation.
//!
//! ```
//! use hvd::{build_hvd, locate, KleinPoint};
//!
//! let sites = [KleinPoint::new([0.5, 0.0])?, KleinPoint::new([-0.5, 0.0])?];
//! let diagram = build_hvd(&sites, 1, 1.0)?;
//! assert_eq!(diagram.cells.len(), 2);
//! let x = KleinPoint::new([0.2, 0.1])?;
//! assert_eq!(locate(&x, &diagram)?.indices(), &[0]);
//! # Ok::<(), hvd::Error>(())
//! ```

pub mod error;
pub mod io;
pub mod lifting;
pub mod model;
pub mod oracle;
pub mod par;
pub mod power;

pub use error::{Error, Result};
pub use lifting::{AffineBisector, LiftedHyperplane, SubsetGenerator, WeightedSite};
pub use model::{AmbientPoint, KleinPoint, Measure, MinkowskiPoint, ProjectionSpec};
pub use oracle::{verify_diagram, VerificationReport};
pub use par::Execution;
pub use power::{build_hvd, build_hvd_with, locate, ClippedDiagram, ConvexCell, Edge};
