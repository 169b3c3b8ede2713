//! Exact normal forms for germs of holomorphic functions, integrable
//! 1-forms and planar vector fields, computed on truncated power series
//! over the Gaussian rationals.

pub mod certificate;
pub mod change;
pub mod closed;
pub mod coeff;
pub mod error;
pub mod foliation;
pub mod forms;
pub mod interchange;
pub mod levinson;
pub mod linalg;
pub mod planar;
pub mod poly;
pub mod refine;
pub mod series;
pub mod weierstrass;

pub use change::{ChangeShape, CoordinateChange};
pub use coeff::Coeff;
pub use error::{Error, Result};
pub use poly::PolyInW;
pub use series::{MultiIndex, Series};
