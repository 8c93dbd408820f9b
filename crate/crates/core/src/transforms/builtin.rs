use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{Certification, KTransform};
use crate::algebra::{AlgebraShape, Block, C64};
use crate::error::{QfaError, Result};
use crate::TAU_NUM;

/// Largest `n` accepted by the `dft:n` registry entry.
pub const MAX_DFT: usize = 4096;

/// The identity map on `shape`, a 1-transform whenever `d_1 ≥ 1`.
pub fn identity_transform(shape: &AlgebraShape) -> KTransform {
    let n = shape.coord_dim();
    // ‖I‖_{1→∞} = 1/d_1
    let cert = Certification {
        one_infty_certified: shape.min_projection_trace() >= 1.0 - TAU_NUM,
        kff_exact: true,
    };
    KTransform::with_certification(
        format!("id:{n}"),
        shape.clone(),
        shape.clone(),
        DMatrix::identity(n, n),
        1.0,
        cert,
    )
    .expect("identity dimensions are consistent")
}

/// The `n`-point DFT with entries `ω^{jk}`, `ω = e^{−2πi/n}`, as an
/// `n`-transform between counting measures.
pub fn dft_transform(n: usize) -> KTransform {
    assert!(n >= 1, "dft needs at least one point");
    let shape = AlgebraShape::counting(n);
    let roots: Vec<C64> = (0..n)
        .map(|m| C64::from_polar(1.0, -2.0 * PI * m as f64 / n as f64))
        .collect();
    let matrix = DMatrix::from_fn(n, n, |j, k| roots[(j * k) % n]);
    // unimodular entries and orthogonal rows of length √n
    let cert = Certification {
        one_infty_certified: true,
        kff_exact: true,
    };
    KTransform::with_certification(format!("dft:{n}"), shape.clone(), shape, matrix, n as f64, cert)
        .expect("dft dimensions are consistent")
}

/// Multiplication table of a finite group on `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CayleyTable {
    n: usize,
    table: Vec<usize>,
    identity: usize,
}

impl CayleyTable {
    /// Validates closure, invertibility (Latin square), identity and
    /// associativity.
    pub fn new(rows: Vec<Vec<usize>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(QfaError::InvalidTable("empty table".into()));
        }
        let mut table = Vec::with_capacity(n * n);
        for (a, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(QfaError::InvalidTable(format!("row {a} has length {}", row.len())));
            }
            if let Some(&bad) = row.iter().find(|&&v| v >= n) {
                return Err(QfaError::InvalidTable(format!("entry {bad} out of range in row {a}")));
            }
            table.extend_from_slice(row);
        }
        for a in 0..n {
            let mut row_seen = vec![false; n];
            let mut col_seen = vec![false; n];
            for b in 0..n {
                row_seen[table[a * n + b]] = true;
                col_seen[table[b * n + a]] = true;
            }
            if row_seen.iter().chain(&col_seen).any(|s| !s) {
                return Err(QfaError::InvalidTable(format!(
                    "element {a} does not act invertibly"
                )));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|b| table[e * n + b] == b && table[b * n + e] == b))
            .ok_or_else(|| QfaError::InvalidTable("no identity element".into()))?;
        for a in 0..n {
            for b in 0..n {
                let ab = table[a * n + b];
                for c in 0..n {
                    if table[ab * n + c] != table[a * n + table[b * n + c]] {
                        return Err(QfaError::InvalidTable(format!(
                            "not associative at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        Ok(Self { n, table, identity })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.n + b]
    }
}

/// A group together with a complete set of irreducible unitary
/// representations, `irreps[π][g]` being the matrix of `π(g)`.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    pub name: String,
    pub table: CayleyTable,
    pub irreps: Vec<Vec<DMatrix<C64>>>,
}

impl FiniteGroup {
    pub fn fourier(&self) -> Result<KTransform> {
        Ok(group_fourier(&self.table, &self.irreps)?.renamed(format!("group:{}", self.name)))
    }
}

/// The group Fourier transform `f ↦ Σ_g f(g) π(g)` from `ℓ^∞(G)` with counting
/// measure onto `⊕_π M_{d_π}` with weights `d_π`; a `|G|`-transform.
pub fn group_fourier(table: &CayleyTable, irreps: &[Vec<DMatrix<C64>>]) -> Result<KTransform> {
    let n = table.order();
    let mut blocks = Vec::with_capacity(irreps.len());
    for (idx, rep) in irreps.iter().enumerate() {
        if rep.len() != n {
            return Err(QfaError::IrrepMismatch(format!(
                "irrep {idx} has {} matrices for a group of order {n}",
                rep.len()
            )));
        }
        let d = rep[0].nrows();
        if d == 0 {
            return Err(QfaError::IrrepMismatch(format!("irrep {idx} is zero-dimensional")));
        }
        for (g, m) in rep.iter().enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(QfaError::IrrepMismatch(format!(
                    "irrep {idx} has a {}x{} matrix at element {g}, expected {d}x{d}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let defect = (m * m.adjoint() - DMatrix::<C64>::identity(d, d)).camax();
            if defect > TAU_NUM {
                return Err(QfaError::IrrepMismatch(format!("irrep {idx} is not unitary at element {g}")));
            }
        }
        for a in 0..n {
            for b in 0..n {
                let defect = (&rep[a] * &rep[b] - &rep[table.mul(a, b)]).camax();
                if defect > TAU_NUM {
                    return Err(QfaError::IrrepMismatch(format!(
                        "irrep {idx} is not a homomorphism at ({a}, {b})"
                    )));
                }
            }
        }
        blocks.push(Block::new(d, d as f64));
    }
    let dim_sum: usize = blocks.iter().map(|b| b.dim * b.dim).sum();
    if dim_sum != n {
        return Err(QfaError::IrrepMismatch(format!(
            "squared irrep dimensions sum to {dim_sum}, group order is {n}"
        )));
    }
    let codomain = AlgebraShape::new(blocks)?;
    let offsets = codomain.coord_offsets();
    let mut matrix = DMatrix::zeros(n, n);
    for (idx, rep) in irreps.iter().enumerate() {
        let d = rep[0].nrows();
        // coordinate of π(g) in the basis e_rs/√d is √d·π(g)_rs
        let scale = (d as f64).sqrt();
        for (g, m) in rep.iter().enumerate() {
            for r in 0..d {
                for s in 0..d {
                    matrix[(offsets[idx] + r * d + s, g)] = m[(r, s)] * scale;
                }
            }
        }
    }
    let t = KTransform::new(format!("group:order{n}"), AlgebraShape::counting(n), codomain, matrix, n as f64)?;
    if !t.kff_exact() {
        return Err(QfaError::IrrepMismatch(
            "F*F differs from |G|·I; the irreps are not pairwise inequivalent".into(),
        ));
    }
    Ok(t)
}

/// `ℤ_n` with characters `χ_j(g) = ω^{jg}`, `ω = e^{−2πi/n}`.
pub fn cyclic_group(n: usize) -> FiniteGroup {
    assert!(n >= 1, "cyclic group of order 0");
    let rows = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    let irreps = (0..n)
        .map(|j| {
            (0..n)
                .map(|g| {
                    let z = C64::from_polar(1.0, -2.0 * PI * ((j * g) % n) as f64 / n as f64);
                    DMatrix::from_element(1, 1, z)
                })
                .collect()
        })
        .collect();
    FiniteGroup {
        name: format!("z{n}"),
        table: CayleyTable::new(rows).expect("cyclic table"),
        irreps,
    }
}

/// `S_3` as permutations of `{0,1,2}` in lexicographic order (identity
/// first), with the trivial, sign and standard representations.
pub fn symmetric_group_s3() -> FiniteGroup {
    let perms: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).expect("permutation");
    let rows = perms
        .iter()
        .map(|g| perms.iter().map(|h| index([g[h[0]], g[h[1]], g[h[2]]])).collect())
        .collect();
    let perm_matrix = |p: &[usize; 3]| {
        let mut m = DMatrix::<f64>::zeros(3, 3);
        for (i, &pi) in p.iter().enumerate() {
            m[(pi, i)] = 1.0;
        }
        m
    };
    // orthonormal basis of the sum-zero plane
    let basis = DMatrix::from_row_slice(
        3,
        2,
        &[
            1.0 / 2f64.sqrt(),
            1.0 / 6f64.sqrt(),
            -1.0 / 2f64.sqrt(),
            1.0 / 6f64.sqrt(),
            0.0,
            -2.0 / 6f64.sqrt(),
        ],
    );
    let to_complex = |m: DMatrix<f64>| m.map(|v| C64::new(v, 0.0));
    let trivial = perms.iter().map(|_| DMatrix::from_element(1, 1, C64::new(1.0, 0.0))).collect();
    let sign = perms
        .iter()
        .map(|p| DMatrix::from_element(1, 1, C64::new(perm_matrix(p).determinant().round(), 0.0)))
        .collect();
    let standard = perms
        .iter()
        .map(|p| to_complex(basis.transpose() * perm_matrix(p) * &basis))
        .collect();
    FiniteGroup {
        name: "s3".into(),
        table: CayleyTable::new(rows).expect("S3 table"),
        irreps: vec![trivial, sign, standard],
    }
}

/// Resolves a registry name: `dft:n`, `id:n`, `group:s3`, `group:zN`, or
/// `tensor:[a,b,...]` with nested names.
pub fn parse_builtin(name: &str) -> Result<KTransform> {
    let name = name.trim();
    let (kind, arg) = name
        .split_once(':')
        .ok_or_else(|| QfaError::Parse(format!("unknown transform '{name}'")))?;
    match kind {
        "dft" | "id" => {
            let n: usize = arg
                .parse()
                .map_err(|_| QfaError::Parse(format!("bad size in '{name}'")))?;
            if n == 0 || n > MAX_DFT {
                return Err(QfaError::Parse(format!("size {n} outside 1..={MAX_DFT}")));
            }
            Ok(if kind == "dft" {
                dft_transform(n)
            } else {
                identity_transform(&AlgebraShape::counting(n))
            })
        }
        "group" => {
            if arg == "s3" {
                return symmetric_group_s3().fourier();
            }
            let n: usize = arg
                .strip_prefix('z')
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| QfaError::Parse(format!("unknown group '{arg}'")))?;
            if n == 0 || n > MAX_DFT {
                return Err(QfaError::Parse(format!("group order {n} outside 1..={MAX_DFT}")));
            }
            cyclic_group(n).fourier()
        }
        "tensor" => {
            let inner = arg
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| QfaError::Parse(format!("tensor needs a bracketed list: '{name}'")))?;
            let parts = split_top_level(inner)?;
            if parts.is_empty() {
                return Err(QfaError::Parse("empty tensor list".into()));
            }
            let mut acc = parse_builtin(parts[0])?;
            for part in &parts[1..] {
                acc = KTransform::tensor(&acc, &parse_builtin(part)?);
            }
            Ok(acc.renamed(name))
        }
        _ => Err(QfaError::Parse(format!("unknown transform '{name}'"))),
    }
}

fn split_top_level(s: &str) -> Result<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(QfaError::Parse(format!("unbalanced brackets in '{s}'")));
        }
    }
    if depth != 0 {
        return Err(QfaError::Parse(format!("unbalanced brackets in '{s}'")));
    }
    if !s.trim().is_empty() {
        parts.push(s[start..].trim());
    }
    Ok(parts)
}
