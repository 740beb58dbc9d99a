//! Flat-simplex 4-manifolds: holonomy, parallel 2-forms, singular strata,
//! leaf tracing and recovery of a metric product decomposition.

pub mod forms;
pub mod holonomy;
pub mod plcomplex;
pub mod split;
pub mod surface2;
pub mod tensor4;
