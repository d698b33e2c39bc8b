//! Automatic selection of the Metamodel of Optimal Prognosis (MOP).
//!
//! Given sampled support points, the crate builds global polynomial and
//! Moving Least Squares (MLS) surrogates over filtered subsets of the inputs,
//! scores every configuration by the cross-validated coefficient of prognosis
//! (CoP), and reports total-effect sensitivity indices evaluated on the
//! winning surrogate and scaled by its CoP.
//!
//! The numerical core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); the `*F64` aliases below name the usual
//! double-precision instantiations.
//!
//! ```
//! use mop_core::{benchmarks, find_mop, MopOptions};
//!
//! let table = benchmarks::quad2d_table::<f64>(60, 1).unwrap();
//! let mut options = MopOptions::default();
//! options.search.kinds = vec![mop_core::ModelKind::PolyLinear, mop_core::ModelKind::PolyQuadraticCoupling];
//! options.sensitivity_samples = 2000;
//! let mop = find_mop(&table, "y", &options).unwrap();
//! assert_eq!(mop.result.model_kind, mop_core::ModelKind::PolyQuadraticCoupling);
//! assert!(mop.result.cop > 0.999);
//! ```

pub mod benchmarks;
pub mod dataset;
pub mod error;
mod linalg;
pub mod mls;
pub mod model;
pub mod mop;
pub mod polyreg;
pub mod quality;
mod scalar;
pub mod sensitivity;

pub use dataset::{
    make_partition, make_split, sample_lhs, DesignTable, Distribution, SubsetPartition, VariableMeta,
};
pub use error::{MopError, Result};
pub use mls::{fit_mls, predict_mls, weight, MlsConfig, MlsModel};
pub use model::{KindTrainer, Metamodel, ModelKind, Predictor, Trainer};
pub use mop::{
    correlations, find_mop, importance_filter, select_winner, significance_filter, CorrelationMatrix,
    FilterConfig, Mop, MopOptions, MopResult, SearchLogEntry, SearchSpace,
};
pub use polyreg::{basis_vector, fit, BasisSpec, Order, PolynomialModel};
pub use quality::{
    cod, cod_adjusted, cop_cross_validation, cop_split, QualityReport, ValidationScheme,
};
pub use scalar::Real;
pub use sensitivity::{coi, cop_single, scaled_indices, total_indices, SensitivityReport};

pub type DesignTableF64 = DesignTable<f64>;
pub type PolynomialModelF64 = PolynomialModel<f64>;
pub type MlsModelF64 = MlsModel<f64>;
pub type MetamodelF64 = Metamodel<f64>;
pub type QualityReportF64 = QualityReport<f64>;
pub type SensitivityReportF64 = SensitivityReport<f64>;
pub type MopResultF64 = MopResult<f64>;
pub type MopOptionsF64 = MopOptions<f64>;

pub type DesignTableF32 = DesignTable<f32>;
pub type MetamodelF32 = Metamodel<f32>;
