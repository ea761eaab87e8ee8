//! Toric, planar and rotated surface codes as CSS parity-check matrices.

mod lattice;
mod single_shot;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{mat_vec_mul, rank, BitMatrix, BitVec};

pub use single_shot::{
    analytic_toric_single_shot, derive_single_shot_basis, local_basis, BasisSource, CheckKind,
    SingleShotBasis,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Toric,
    Planar,
    Rotated,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Toric => "toric",
            Family::Planar => "planar",
            Family::Rotated => "rotated",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "toric" => Ok(Family::Toric),
            "planar" => Ok(Family::Planar),
            "rotated" => Ok(Family::Rotated),
            other => Err(Error::InvalidParameter(format!(
                "unknown code family {other:?}"
            ))),
        }
    }
}

/// Which check type is meant. `Z` checks detect X errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    X,
    Z,
}

impl Side {
    pub fn dual(self) -> Side {
        match self {
            Side::X => Side::Z,
            Side::Z => Side::X,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::X => "X",
            Side::Z => "Z",
        })
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(Side::X),
            "Z" | "z" => Ok(Side::Z),
            other => Err(Error::InvalidParameter(format!("unknown side {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Horizontal,
    Vertical,
    /// Qubits on the vertices of the rotated lattice.
    Site,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QubitCoord {
    pub orientation: Orientation,
    pub row: usize,
    pub col: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CssCode {
    pub family: Family,
    pub size: usize,
    pub n: usize,
    pub k: usize,
    pub hx: BitMatrix,
    pub hz: BitMatrix,
    /// X-type logical operators; `logical_x[i]` pairs with `logical_z[i]`.
    pub logical_x: Vec<BitVec>,
    pub logical_z: Vec<BitVec>,
    /// Lattice coordinate of each qubit.
    pub layout: Vec<QubitCoord>,
    #[serde(skip)]
    index: HashMap<QubitCoord, usize>,
}

impl CssCode {
    pub(crate) fn new(
        family: Family,
        size: usize,
        hx: BitMatrix,
        hz: BitMatrix,
        logical_x: Vec<BitVec>,
        logical_z: Vec<BitVec>,
        layout: Vec<QubitCoord>,
    ) -> Self {
        let n = hx.cols();
        let k = n - rank(&hx) - rank(&hz);
        let index = layout.iter().enumerate().map(|(q, &c)| (c, q)).collect();
        Self {
            family,
            size,
            n,
            k,
            hx,
            hz,
            logical_x,
            logical_z,
            layout,
            index,
        }
    }

    pub fn qubit(&self, orientation: Orientation, row: usize, col: usize) -> Option<usize> {
        self.index
            .get(&QubitCoord {
                orientation,
                row,
                col,
            })
            .copied()
    }

    /// Local check matrix of one side.
    pub fn checks(&self, side: Side) -> &BitMatrix {
        match side {
            Side::X => &self.hx,
            Side::Z => &self.hz,
        }
    }

    /// Logical operators that detect errors caught by `side` checks: X
    /// errors are judged against Z logicals and vice versa.
    pub fn detecting_logicals(&self, side: Side) -> &[BitVec] {
        match side {
            Side::Z => &self.logical_z,
            Side::X => &self.logical_x,
        }
    }
}

pub fn build_code(family: Family, size: usize) -> Result<CssCode> {
    if size < 2 {
        return Err(Error::InvalidParameter(format!(
            "lattice size must be at least 2, got {size}"
        )));
    }
    Ok(match family {
        Family::Toric => lattice::toric(size),
        Family::Planar => lattice::planar(size),
        Family::Rotated => lattice::rotated(size),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Violation {
    /// Z check `z_row` and X check `x_row` overlap on an odd number of qubits.
    Anticommuting {
        z_row: usize,
        x_row: usize,
    },
    LogicalAnticommutesWithCheck {
        logical: Side,
        index: usize,
        check_row: usize,
    },
    LogicalPairing {
        x_index: usize,
        z_index: usize,
        overlap_odd: bool,
    },
    LogicalCount {
        expected: usize,
        found: usize,
    },
    ColumnCount {
        side: Side,
        expected: usize,
        found: usize,
    },
    /// Toric only: n must be 2L², k must be 2, local checks weight 4.
    ToricShape(String),
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_css(code: &CssCode) -> ValidationReport {
    let mut violations = Vec::new();
    for (side, m) in [(Side::X, &code.hx), (Side::Z, &code.hz)] {
        if m.cols() != code.n {
            violations.push(Violation::ColumnCount {
                side,
                expected: code.n,
                found: m.cols(),
            });
        }
    }
    if !violations.is_empty() {
        return ValidationReport { violations };
    }

    for z_row in 0..code.hz.rows() {
        let zr = code.hz.row(z_row);
        for x_row in 0..code.hx.rows() {
            if zr.dot(&code.hx.row(x_row)) {
                violations.push(Violation::Anticommuting { z_row, x_row });
            }
        }
    }

    let k = code.n - rank(&code.hx) - rank(&code.hz);
    for (side, logicals) in [(Side::X, &code.logical_x), (Side::Z, &code.logical_z)] {
        if logicals.len() != k {
            violations.push(Violation::LogicalCount {
                expected: k,
                found: logicals.len(),
            });
        }
        // X logicals must commute with Z checks and vice versa.
        let checks = code.checks(side.dual());
        for (index, l) in logicals.iter().enumerate() {
            match mat_vec_mul(checks, l) {
                Ok(s) => {
                    for check_row in s.ones() {
                        violations.push(Violation::LogicalAnticommutesWithCheck {
                            logical: side,
                            index,
                            check_row,
                        });
                    }
                }
                Err(_) => violations.push(Violation::ColumnCount {
                    side,
                    expected: code.n,
                    found: l.len(),
                }),
            }
        }
    }
    for (i, lx) in code.logical_x.iter().enumerate() {
        for (j, lz) in code.logical_z.iter().enumerate() {
            if lx.len() == lz.len() && lx.dot(lz) != (i == j) {
                violations.push(Violation::LogicalPairing {
                    x_index: i,
                    z_index: j,
                    overlap_odd: i != j,
                });
            }
        }
    }

    if code.family == Family::Toric {
        let l = code.size;
        if code.n != 2 * l * l {
            violations.push(Violation::ToricShape(format!("n = {} != 2L^2", code.n)));
        }
        if k != 2 {
            violations.push(Violation::ToricShape(format!("k = {k} != 2")));
        }
        for (side, m) in [(Side::X, &code.hx), (Side::Z, &code.hz)] {
            for r in 0..m.rows() {
                if m.row_weight(r) != 4 {
                    violations.push(Violation::ToricShape(format!(
                        "{side} check {r} has weight {}",
                        m.row_weight(r)
                    )));
                }
            }
        }
    }
    ValidationReport { violations }
}
