//! Weak and strong market alignment certificates: exact checks and minimax fits.

mod cert;
mod check;
mod fit;
mod implies;

pub use cert::{AlignmentCert, StrongAlignmentCert, WeakAlignmentCert};
pub use check::{check_strong, check_weak, WeakResiduals};
pub use fit::{chebyshev_fit, fit_strong_exact, fit_weak_user_exact, ChebyshevFit};
pub use implies::strong_implies_weak;
