use thiserror::Error;

/// Errors raised by the lattice, enumeration, Pfaffian and sampling routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(
        "lattice size {0} is too small: n = 1 collapses the torus into a multigraph (need n >= 2)"
    )]
    Size(usize),

    #[error("invalid parameters: {0}")]
    Params(String),

    #[error("configuration violates the degree-1-or-2 constraint at vertex {vertex}")]
    Constraint { vertex: usize },

    #[error("edge {edge} has kind {found}, expected {expected}")]
    Kind {
        edge: usize,
        found: char,
        expected: char,
    },

    #[error("edges {0} and {1} do not lie on a common NW/SE diagonal")]
    NotDiagonal(usize, usize),

    #[error("invalid path: {0}")]
    Path(String),

    #[error("matrix shape error: {0}")]
    Shape(String),

    #[error("matrix is not skew-symmetric (max |M + M^T| = {0:e})")]
    Symmetry(f64),

    #[error("decorated graph construction failed: {0}")]
    Construction(String),

    #[error("{what} needs n <= {max}, got n = {n}")]
    Resource {
        what: &'static str,
        n: usize,
        max: usize,
    },

    #[error(
        "K(z,w) is singular at grid point (theta1, theta2) = ({0:.6}, {1:.6}); \
         parameters are critical, use the half-offset grid"
    )]
    QuadratureSingularity(f64, f64),

    #[error(
        "parameters ({a}, {b}, {c}) lie within {margin:e} of the critical surface \
         sqrt(a) = sqrt(b) + sqrt(c); refusing to report a correlation"
    )]
    NearCritical { a: f64, b: f64, c: f64, margin: f64 },

    #[error("degenerate couplings: ABC = 0 (A = {0}, B = {1}, C = {2}); one weight equals the sum of the others")]
    DegenerateCoupling(f64, f64, f64),

    #[error("degenerate sum: |denominator| = {0:e}")]
    DegenerateSum(f64),

    #[error("sample size too small: {got} post-burnin sweeps, need at least {need}")]
    SampleSize { got: usize, need: usize },

    #[error("complex Pfaffian has imaginary residue {0:e} (tolerance 1e-9)")]
    ImaginaryResidue(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("characteristic polynomial mismatch: max relative deviation {0:e}")]
    DecorationMismatch(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
