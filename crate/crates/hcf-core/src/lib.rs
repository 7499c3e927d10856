//! Numerical laboratory for the Hermitian curvature flow with torsion
//! correction: coordinate geometry of the Chern connection, positivity
//! diagnostics for Griffiths-type curvature conditions, flow integration on
//! periodic grids and closed-form ansatz families, and twisted parallel
//! transport along curves.

pub mod chart;
pub mod curvature;
pub mod error;
pub mod expr;
pub mod flow;
pub mod geometry;
pub mod jets;
pub mod linalg;
pub mod metrics;
pub mod positivity;
pub mod spectral;
pub mod tensor;
pub mod transport;

pub use chart::Chart;
pub use curvature::{evolution_rhs, structure_residuals, CurvatureTensor};
pub use error::{HcfError, Result};
pub use flow::{
    barrier_probe, evolution_consistency_check, flow_step, run_flow, write_monitor_csv,
    write_snapshot, AnsatzFamily, FlowBackend, FlowConfig, FlowRun, FlowState,
};
pub use geometry::{compute_frame, FlowVariant, PointGeometry};
pub use jets::{ComplexJet, JetError};
pub use metrics::{metric_catalog, MetricField};
pub use positivity::{min_griffiths, GriffithsOptions, GriffithsReport};
pub use transport::{transport_pair, Curve, TransportOptions, TransportState};
