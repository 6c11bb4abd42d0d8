//! Carbon emissions embodied in trade and global value chain participation
//! from inter-country input-output tables, and the panel regressions that
//! relate the two.
//!
//! The pipeline runs [`ingest`] → [`mrio`] → [`panel`] →
//! [`estimators`] / [`diagnostics`] → [`report`].
//!
//! ```
//! use gvc_carbon::mrio::{build_coefficients, IcioTable};
//! use nalgebra::{DMatrix, DVector};
//!
//! let icio = IcioTable::new(
//!     vec!["AAA".into()],
//!     vec!["D10".into()],
//!     DMatrix::from_element(1, 1, 50.0),
//!     DMatrix::from_element(1, 1, 50.0),
//!     DVector::from_element(1, 100.0),
//! )?;
//! let model = build_coefficients(&icio)?.leontief_inverse()?;
//! assert!((model.inverse()[(0, 0)] - 2.0).abs() < 1e-12);
//! # Ok::<(), gvc_carbon::mrio::MrioError>(())
//! ```

pub mod diagnostics;
pub mod estimators;
pub mod ingest;
pub mod mrio;
pub mod panel;
pub mod report;
pub mod synth;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/inputs.md")]
    mod inputs {}
    #[doc = include_str!("../../../book/src/accounts.md")]
    mod accounts {}
    #[doc = include_str!("../../../book/src/panel.md")]
    mod panel {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/checking.md")]
    mod checking {}
}

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mrio(#[from] mrio::MrioError),
    #[error(transparent)]
    Panel(#[from] panel::PanelError),
    #[error(transparent)]
    Estimator(#[from] estimators::EstimatorError),
    #[error(transparent)]
    Diagnostics(#[from] diagnostics::DiagnosticsError),
    #[error(transparent)]
    Ingest(#[from] ingest::IngestError),
}

impl Error {
    /// True for failures of the numerics (non-productive economies, rank
    /// deficiency, explosive or degenerate residuals) as opposed to bad
    /// input files or configuration.
    pub fn is_numerical(&self) -> bool {
        use estimators::EstimatorError as E;
        match self {
            Error::Mrio(m) | Error::Ingest(ingest::IngestError::Table(m)) => {
                matches!(
                    m,
                    mrio::MrioError::NonProductive(_) | mrio::MrioError::SingularOutput(_)
                )
            }
            Error::Estimator(e) => matches!(
                e,
                E::RankDeficient { .. }
                    | E::NonStationaryRho(_)
                    | E::SingularSubCovariance
                    | E::DegenerateVariance(_)
                    | E::InsufficientObservations { .. }
            ),
            Error::Diagnostics(d) => {
                matches!(d, diagnostics::DiagnosticsError::DegenerateSeries(_))
            }
            Error::Panel(_) | Error::Ingest(_) => false,
        }
    }
}
