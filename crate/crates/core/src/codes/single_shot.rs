use serde::{Deserialize, Serialize};

use super::{CssCode, Side};
use crate::error::{Error, Result};
use crate::gf2::{row_reduce_tracked, BitMatrix, TrackedElimination};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisSource {
    Analytic,
    Eliminated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckKind {
    Local,
    /// Column strip of plaquettes starting at row `i` of column `j`.
    Rectangular {
        i: usize,
        j: usize,
    },
    /// Band of full plaquette columns `i..L-1`, wrapping the torus.
    Circular {
        i: usize,
    },
    Eliminated,
}

impl CheckKind {
    pub fn label(&self) -> &'static str {
        match self {
            CheckKind::Local => "local",
            CheckKind::Rectangular { .. } => "rectangular",
            CheckKind::Circular { .. } => "circular",
            CheckKind::Eliminated => "eliminated",
        }
    }
}

/// Full-rank checks in which check `i` is flipped by a single-qubit error on
/// `designated_qubit[i]` and by no other designated error.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SingleShotBasis {
    pub side: Side,
    /// One row per check, columns in the code's qubit order.
    pub checks: BitMatrix,
    /// Relates `checks` to the local check matrix of the same side.
    pub elimination: TrackedElimination,
    pub designated_qubit: Vec<usize>,
    pub kinds: Vec<CheckKind>,
    pub source: BasisSource,
}

impl SingleShotBasis {
    pub fn len(&self) -> usize {
        self.checks.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.checks.rows() == 0
    }

    pub fn check_weights(&self) -> Vec<usize> {
        (0..self.checks.rows())
            .map(|r| self.checks.row_weight(r))
            .collect()
    }
}

/// Rectangular and circular checks of the L×L toric code.
///
/// On the Z side, `R(i,j)` multiplies plaquettes `(i..=L-2, j)` and has its
/// designated error on `h(i,j)`; `S(i)` multiplies every plaquette in
/// columns `i..=L-2` and has its designated error on `v(L-1, i)`. Row `L-1`
/// of plaquettes never enters a check, which is what keeps the set
/// independent. The X side is the image of the Z side under the lattice
/// duality `h(a,b) → v(-a,b)`, `v(a,b) → h(-a,b-1)`, which sends plaquette
/// `(i,j)` to vertex `(-i,j)`.
pub fn analytic_toric_single_shot(size: usize, side: Side) -> Result<SingleShotBasis> {
    if size < 2 {
        return Err(Error::InvalidParameter(format!(
            "lattice size must be at least 2, got {size}"
        )));
    }
    let l = size;
    let code = super::lattice::toric(l);
    let n = code.n;
    let h = |i: usize, j: usize| (i % l) * l + (j % l);
    let v = |i: usize, j: usize| l * l + (i % l) * l + (j % l);
    let plaquette = |i: usize, j: usize| code.hz.row(i * l + j);

    let mut rows = Vec::with_capacity(l * l - 1);
    let mut designated = Vec::with_capacity(l * l - 1);
    let mut kinds = Vec::with_capacity(l * l - 1);
    for i in 0..l - 1 {
        for j in 0..l {
            let mut row = plaquette(i, j);
            for k in i + 1..l - 1 {
                row.xor_assign(&plaquette(k, j));
            }
            rows.push(row);
            designated.push(h(i, j));
            kinds.push(CheckKind::Rectangular { i, j });
        }
    }
    for i in 0..l - 1 {
        let mut row = crate::gf2::BitVec::zeros(n);
        for m in i..l - 1 {
            for r in 0..l {
                row.xor_assign(&plaquette(r, m));
            }
        }
        rows.push(row);
        designated.push(v(l - 1, i));
        kinds.push(CheckKind::Circular { i });
    }

    if side == Side::X {
        let dual = |q: usize| {
            if q < l * l {
                let (a, b) = (q / l, q % l);
                v(l - a, b)
            } else {
                let (a, b) = ((q - l * l) / l, (q - l * l) % l);
                h(l - a, b + l - 1)
            }
        };
        rows = rows
            .iter()
            .map(|r| crate::gf2::BitVec::from_indices(n, r.ones().map(dual)))
            .collect();
        designated = designated.into_iter().map(dual).collect();
    }

    let checks = BitMatrix::from_rows(n, &rows)?;
    let elimination =
        TrackedElimination::from_row_combination(code.checks(side), &checks, &designated)?;
    Ok(SingleShotBasis {
        side,
        checks,
        elimination,
        designated_qubit: designated,
        kinds,
        source: BasisSource::Analytic,
    })
}

/// Standard-form checks from Gauss–Jordan elimination of the local checks.
/// Check `i` is the reduced row whose pivot is `designated_qubit[i]`.
pub fn derive_single_shot_basis(code: &CssCode, side: Side) -> SingleShotBasis {
    let elimination = row_reduce_tracked(code.checks(side));
    let checks = elimination.reduced_rows();
    let designated_qubit = elimination.column_perm[..elimination.rank].to_vec();
    SingleShotBasis {
        side,
        kinds: vec![CheckKind::Eliminated; checks.rows()],
        checks,
        elimination,
        designated_qubit,
        source: BasisSource::Eliminated,
    }
}

/// The local checks with the bookkeeping of a basis; redundant rows are
/// kept and no qubits are designated. Used for export only.
pub fn local_basis(code: &CssCode, side: Side) -> (BitMatrix, Vec<CheckKind>) {
    let m = code.checks(side).clone();
    let kinds = vec![CheckKind::Local; m.rows()];
    (m, kinds)
}
