//! Equivariant degree vectors of local maps under finite orthogonal groups.
//!
//! A finite group `G ⊂ O(n)` acts on an invariant open set `Ω ⊂ ℝⁿ`. An
//! equivariant local map `f: Ω → ℝⁿ` has a compact zero set; up to otopy
//! it is classified by one integer per pair `(H, α)`, where `(H)` runs over
//! the orbit types of `Ω` and `α` over the components of `Ω_H / WH`.
//!
//! * [`analysis::Analysis`] builds the orbit-type table and the charts.
//! * [`degree::equivariant_degree`] computes the vector of a map.
//! * [`realize::realize`] builds a map with a prescribed vector.
//! * [`otopy`] checks invariance along families and additivity.
//!
//! ```
//! use equideg::config::RunConfig;
//! use equideg::degree::equivariant_degree;
//!
//! let config = RunConfig::from_toml(r#"
//!     [group]
//!     dim = 1
//!     generators = ["-1"]
//!     [domain]
//!     boxes = ["1 3"]
//!     [map]
//!     expressions = ["x1^3 - 4*x1"]
//! "#).unwrap();
//! let analysis = config.analysis().unwrap();
//! let f = config.build_map(&analysis).unwrap().unwrap();
//! let v = equivariant_degree(&f, &analysis).unwrap().vector;
//! assert_eq!(v.to_machine_block(), "#vector\nH=0 alpha=0 deg=1\n");
//! ```

pub mod analysis;
pub mod chart;
pub mod config;
pub mod degree;
pub mod domain;
pub mod error;
pub mod group;
pub mod linalg;
pub mod map;
pub mod oracle;
pub mod orbit_types;
pub mod otopy;
pub mod poly;
pub mod realize;
pub mod report;
pub mod scalar;

pub use analysis::{Analysis, Options};
pub use degree::{equivariant_degree, DegreeKey, DegreeVector};
pub use error::{Error, Result};
pub use map::EquivariantLocalMap;
pub use realize::realize;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/groups.md")]
    mod groups {}
    #[doc = include_str!("../../../book/src/components.md")]
    mod components {}
    #[doc = include_str!("../../../book/src/degree.md")]
    mod degree {}
    #[doc = include_str!("../../../book/src/realization.md")]
    mod realization {}
    #[doc = include_str!("../../../book/src/otopies.md")]
    mod otopies {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
