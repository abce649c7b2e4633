//! CQRRPT: pivots and a preconditioner from the QRCP of a sketch, then
//! CholeskyQR on the preconditioned columns.

mod cholqr;
mod config;
mod core;
mod flops;
mod rank;

pub use cholqr::{cholesky_qr, cholesky_qr2};
pub use config::{CqrrptConfig, DEFAULT_EPS_TOL, DEFAULT_GAMMA};
pub use core::{
    cqrrpt, cqrrpt_core, precondition, CqrrptDiagnostics, CqrrptOutput, PhaseTimings,
    Preconditioned,
};
pub use flops::{flop_model, flop_model_sixths};
pub use rank::{
    cond_estimate, rank_stage1, rank_stage2, BoundKind, CondBound, CondMethod, Stage2,
    KRYLOV_INFLATION, MAX_CHOLESKY_RETRIES,
};
