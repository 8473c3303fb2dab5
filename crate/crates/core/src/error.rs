use core::fmt;

/// Errors raised by the analytic layer.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain where the quantity is defined.
    Domain(&'static str),
    /// The endpoints handed to the root finder do not bracket a sign change.
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    /// An iterative method ran out of iterations. `estimate` is the best
    /// value reached so far.
    Convergence {
        what: &'static str,
        estimate: f64,
        error: f64,
    },
    /// A bracket could not be constructed for a solve whose root is known
    /// to exist.
    Solver(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    /// Whether the error comes from an iterative solver rather than from
    /// invalid input.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::Domain(_))
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Bracket { lo, hi, f_lo, f_hi } => write!(
                f,
                "no sign change on [{lo:e}, {hi:e}] (f(lo) = {f_lo:e}, f(hi) = {f_hi:e})"
            ),
            Error::Convergence {
                what,
                estimate,
                error,
            } => write!(
                f,
                "{what} did not converge (best estimate {estimate:e}, error {error:e})"
            ),
            Error::Solver(msg) => write!(f, "solver error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
