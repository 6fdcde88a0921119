//! Exact truncated extension of planar gradient data to a field parallel
//! to its curl, with residual certification.

mod poly;
mod series;

pub use poly::{parse_poly, parse_rational, BivariatePoly, PolyError};
pub use series::{
    check_compatibility, evaluation_grid_csv, extend, linear_datum_closed_form_error, residual,
    BeltramiError, CauchyDatum, ResidualReport, VectorSeries,
};
