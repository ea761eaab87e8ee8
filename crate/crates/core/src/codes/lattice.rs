use super::{CssCode, Family, Orientation, QubitCoord};
use crate::gf2::{BitMatrix, BitVec};

/// Qubits sit on edges of an L×L periodic square lattice.
///
/// Horizontal edge `h(i,j)` is the top edge of plaquette `(i,j)` and has
/// index `i·L + j`; vertical edge `v(i,j)` is its left edge, index
/// `L² + i·L + j`. Plaquette `(i,j)` is Z-check row `i·L + j`; the vertex at
/// the top-left corner of plaquette `(i,j)` is X-check row `i·L + j`.
pub(super) fn toric(l: usize) -> CssCode {
    let h = |i: usize, j: usize| (i % l) * l + (j % l);
    let v = |i: usize, j: usize| l * l + (i % l) * l + (j % l);
    let mut plaquettes = Vec::with_capacity(l * l);
    let mut vertices = Vec::with_capacity(l * l);
    for i in 0..l {
        for j in 0..l {
            plaquettes.push(vec![h(i, j), h(i + 1, j), v(i, j), v(i, j + 1)]);
            vertices.push(vec![h(i, j), h(i, j + l - 1), v(i, j), v(i + l - 1, j)]);
        }
    }
    let n = 2 * l * l;
    let hz = BitMatrix::from_supports(n, &plaquettes);
    let hx = BitMatrix::from_supports(n, &vertices);

    // Pair 0: X along a row of vertical edges, Z along a column of them.
    // Pair 1: X along a column of horizontal edges, Z along a row of them.
    let logical_x = vec![
        BitVec::from_indices(n, (0..l).map(|j| v(0, j))),
        BitVec::from_indices(n, (0..l).map(|i| h(i, 0))),
    ];
    let logical_z = vec![
        BitVec::from_indices(n, (0..l).map(|i| v(i, 0))),
        BitVec::from_indices(n, (0..l).map(|j| h(0, j))),
    ];

    let layout = edge_layout(l, l, l, l);
    CssCode::new(Family::Toric, l, hx, hz, logical_x, logical_z, layout)
}

fn edge_layout(h_rows: usize, h_cols: usize, v_rows: usize, v_cols: usize) -> Vec<QubitCoord> {
    let mut layout = Vec::with_capacity(h_rows * h_cols + v_rows * v_cols);
    for (orientation, rows, cols) in [
        (Orientation::Horizontal, h_rows, h_cols),
        (Orientation::Vertical, v_rows, v_cols),
    ] {
        for row in 0..rows {
            for col in 0..cols {
                layout.push(QubitCoord {
                    orientation,
                    row,
                    col,
                });
            }
        }
    }
    layout
}

/// Planar code of distance L with open boundaries.
///
/// Horizontal edges `H(r,c)`, `r,c ∈ 0..L`, index `r·L + c`; vertical edges
/// `V(r,c)`, `r,c ∈ 0..L-1`, index `L² + r·(L-1) + c`. Plaquette `(r,c)` for
/// `r < L-1` has `H(r,c)`, `H(r+1,c)` and the vertical edges on either side
/// where they exist; the top and bottom rows of horizontal edges touch one
/// plaquette each. Vertex `(r,c)` for `c < L-1` joins `H(r,c)`, `H(r,c+1)`
/// and the vertical edges above and below it.
pub(super) fn planar(l: usize) -> CssCode {
    let hq = |r: usize, c: usize| r * l + c;
    let vq = |r: usize, c: usize| l * l + r * (l - 1) + c;
    let n = l * l + (l - 1) * (l - 1);

    let mut plaquettes = Vec::new();
    for r in 0..l - 1 {
        for c in 0..l {
            let mut s = vec![hq(r, c), hq(r + 1, c)];
            if c >= 1 {
                s.push(vq(r, c - 1));
            }
            if c + 1 < l {
                s.push(vq(r, c));
            }
            plaquettes.push(s);
        }
    }
    let mut vertices = Vec::new();
    for r in 0..l {
        for c in 0..l - 1 {
            let mut s = vec![hq(r, c), hq(r, c + 1)];
            if r >= 1 {
                s.push(vq(r - 1, c));
            }
            if r + 1 < l {
                s.push(vq(r, c));
            }
            vertices.push(s);
        }
    }
    let hz = BitMatrix::from_supports(n, &plaquettes);
    let hx = BitMatrix::from_supports(n, &vertices);
    let logical_x = vec![BitVec::from_indices(n, (0..l).map(|r| hq(r, 0)))];
    let logical_z = vec![BitVec::from_indices(n, (0..l).map(|c| hq(0, c)))];
    let layout = edge_layout(l, l, l - 1, l - 1);
    CssCode::new(Family::Planar, l, hx, hz, logical_x, logical_z, layout)
}

/// Rotated surface code on an L×L grid of qubits, index `r·L + c`.
///
/// Face `(r,c)` touches qubits `(r..=r+1, c..=c+1)`; interior faces are Z
/// checks when `r + c` is even and X checks otherwise. Weight-2 faces along
/// the top and bottom edges are X checks, along the left and right edges Z
/// checks, following the same checkerboard.
pub(super) fn rotated(l: usize) -> CssCode {
    let q = |r: usize, c: usize| r * l + c;
    let n = l * l;
    let is_z = |r: isize, c: isize| (r + c).rem_euclid(2) == 0;
    let mut z_checks = Vec::new();
    let mut x_checks = Vec::new();
    let li = l as isize;
    for r in -1..li {
        for c in -1..li {
            let support: Vec<usize> = [(r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1)]
                .into_iter()
                .filter(|&(a, b)| (0..li).contains(&a) && (0..li).contains(&b))
                .map(|(a, b)| q(a as usize, b as usize))
                .collect();
            let interior = (0..li - 1).contains(&r) && (0..li - 1).contains(&c);
            let top_bottom = (r == -1 || r == li - 1) && (0..li - 1).contains(&c);
            let left_right = (c == -1 || c == li - 1) && (0..li - 1).contains(&r);
            if interior {
                if is_z(r, c) {
                    z_checks.push(support);
                } else {
                    x_checks.push(support);
                }
            } else if top_bottom && !is_z(r, c) {
                x_checks.push(support);
            } else if left_right && is_z(r, c) {
                z_checks.push(support);
            }
        }
    }
    let hz = BitMatrix::from_supports(n, &z_checks);
    let hx = BitMatrix::from_supports(n, &x_checks);
    let logical_x = vec![BitVec::from_indices(n, (0..l).map(|r| q(r, 0)))];
    let logical_z = vec![BitVec::from_indices(n, (0..l).map(|c| q(0, c)))];
    let layout = (0..l)
        .flat_map(|row| {
            (0..l).map(move |col| QubitCoord {
                orientation: Orientation::Site,
                row,
                col,
            })
        })
        .collect();
    CssCode::new(Family::Rotated, l, hx, hz, logical_x, logical_z, layout)
}
