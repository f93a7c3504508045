//! Mixed-precision execution policy.
//!
//! Operations whose cost scales with the long dimension `m` ("dominant") run in
//! the working precision. Operations on `k`- or `n`-sized data ("minor") may run
//! in a finer precision and are rounded once to the working format.
//!
//! Only binary32 and binary64 are available, so the finer minor precision is
//! always binary64 under binary32 working precision. The separation
//! polynomial between the two roundoffs is not enforced.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::{Precision, Scalar};

pub fn unit_roundoff(p: Precision) -> f64 {
    p.unit_roundoff()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpClass {
    Dominant,
    Minor,
}

/// Registry of kernels whose precision the policy decides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    ApplySketch,
    SmallQr,
    RrqrSmall,
    SmallLeastSquares,
    SmallCholesky,
    SmallTriSolve,
    TriSolveRightMxn,
    GramianMxn,
    QUpdate,
}

impl Op {
    pub const ALL: [Op; 9] = [
        Op::ApplySketch,
        Op::SmallQr,
        Op::RrqrSmall,
        Op::SmallLeastSquares,
        Op::SmallCholesky,
        Op::SmallTriSolve,
        Op::TriSolveRightMxn,
        Op::GramianMxn,
        Op::QUpdate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Op::ApplySketch => "apply_sketch",
            Op::SmallQr => "small_qr",
            Op::RrqrSmall => "rrqr_small",
            Op::SmallLeastSquares => "least_squares_small",
            Op::SmallCholesky => "cholesky_small",
            Op::SmallTriSolve => "tri_solve_small",
            Op::TriSolveRightMxn => "tri_solve_right_mxn",
            Op::GramianMxn => "gramian_mxn",
            Op::QUpdate => "q_update",
        }
    }

    pub fn from_name(name: &str) -> Result<Op> {
        Op::ALL
            .into_iter()
            .find(|op| op.name() == name)
            .ok_or_else(|| Error::UnknownOp(name.to_string()))
    }

    pub fn class(self) -> OpClass {
        match self {
            Op::ApplySketch
            | Op::SmallQr
            | Op::RrqrSmall
            | Op::SmallLeastSquares
            | Op::SmallCholesky
            | Op::SmallTriSolve => OpClass::Minor,
            Op::TriSolveRightMxn | Op::GramianMxn | Op::QUpdate => OpClass::Dominant,
        }
    }
}

pub fn classify(op_name: &str) -> Result<OpClass> {
    Op::from_name(op_name).map(Op::class)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Uniform,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionPolicy {
    working: Precision,
    minor: Precision,
}

impl PrecisionPolicy {
    pub const F64: Self = Self {
        working: Precision::Binary64,
        minor: Precision::Binary64,
    };
    pub const F32: Self = Self {
        working: Precision::Binary32,
        minor: Precision::Binary32,
    };
    pub const MIXED: Self = Self {
        working: Precision::Binary32,
        minor: Precision::Binary64,
    };

    /// Rejects a minor precision coarser than the working one.
    pub fn new(working: Precision, minor: Precision) -> Result<Self> {
        if minor.unit_roundoff() > working.unit_roundoff() {
            return Err(Error::InvalidArgument(format!(
                "minor precision {minor} is coarser than working precision {working}"
            )));
        }
        Ok(Self { working, minor })
    }

    pub fn uniform(p: Precision) -> Self {
        Self {
            working: p,
            minor: p,
        }
    }

    pub fn working(&self) -> Precision {
        self.working
    }

    pub fn minor(&self) -> Precision {
        self.minor
    }

    pub fn mode(&self) -> Mode {
        if self.working == self.minor {
            Mode::Uniform
        } else {
            Mode::Mixed
        }
    }

    pub fn precision_for(&self, op: Op) -> Precision {
        match op.class() {
            OpClass::Dominant => self.working,
            OpClass::Minor => self.minor,
        }
    }

    /// Working unit roundoff `u`.
    pub fn u(&self) -> f64 {
        self.working.unit_roundoff()
    }

    /// Minor unit roundoff `u_f`.
    pub fn u_minor(&self) -> f64 {
        self.minor.unit_roundoff()
    }

    pub fn check_working<T: Scalar>(&self) -> Result<()> {
        if T::PRECISION != self.working {
            return Err(Error::PrecisionMismatch(format!(
                "data is {} but the policy's working precision is {}",
                T::PRECISION,
                self.working
            )));
        }
        Ok(())
    }

    pub fn flag(&self) -> &'static str {
        match (self.working, self.minor) {
            (Precision::Binary64, _) => "f64",
            (Precision::Binary32, Precision::Binary32) => "f32",
            (Precision::Binary32, Precision::Binary64) => "mixed",
        }
    }
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self::F64
    }
}

impl FromStr for PrecisionPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f64" => Ok(Self::F64),
            "f32" => Ok(Self::F32),
            "mixed" => Ok(Self::MIXED),
            other => Err(Error::InvalidArgument(format!(
                "unknown precision `{other}` (expected f64, f32 or mixed)"
            ))),
        }
    }
}

impl fmt::Display for PrecisionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.flag())
    }
}

/// Runs `$body` with `$u` bound to the scalar type of precision `$p`.
#[macro_export]
macro_rules! with_precision {
    ($p:expr, $u:ident => $body:expr) => {
        match $p {
            $crate::matrix::Precision::Binary64 => {
                type $u = f64;
                $body
            }
            $crate::matrix::Precision::Binary32 => {
                type $u = f32;
                $body
            }
        }
    };
}
