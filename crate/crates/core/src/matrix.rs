//! Dense matrices over a [`NumberField`], exact Gaussian elimination.

use std::fmt;

use crate::numberfield::{FieldElement, NumberField};

#[derive(Clone, PartialEq, Eq)]
pub struct FMatrix {
    field: NumberField,
    rows: usize,
    cols: usize,
    data: Vec<Vec<FieldElement>>,
}

impl FMatrix {
    pub fn zeros(field: &NumberField, rows: usize, cols: usize) -> Self {
        FMatrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![vec![field.zero(); cols]; rows],
        }
    }

    pub fn identity(field: &NumberField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i][i] = field.one();
        }
        m
    }

    /// Builds a matrix from rows; every row must have `cols` entries.
    pub fn from_rows(field: &NumberField, cols: usize, data: Vec<Vec<FieldElement>>) -> Self {
        assert!(data.iter().all(|r| r.len() == cols), "ragged matrix");
        FMatrix {
            field: field.clone(),
            rows: data.len(),
            cols,
            data,
        }
    }

    pub fn from_i64(field: &NumberField, rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let data = rows
            .iter()
            .map(|r| r.iter().map(|&v| field.from_i64(v)).collect())
            .collect();
        Self::from_rows(field, cols, data)
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &FieldElement {
        &self.data[r][c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        self.data[r][c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.data[r]
    }

    pub fn to_rows(&self) -> Vec<Vec<FieldElement>> {
        self.data.clone()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(&self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j][i] = self.data[i][j].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &FMatrix) -> FMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(&self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other.data[k][j];
                    if !b.is_zero() {
                        out.data[i][j] = &out.data[i][j] + &(a * b);
                    }
                }
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn left_apply(&self, v: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(v.len(), self.rows, "dimension mismatch in vector product");
        let mut out = vec![self.field.zero(); self.cols];
        for (k, a) in v.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, slot) in out.iter_mut().enumerate() {
                let b = &self.data[k][j];
                if !b.is_zero() {
                    *slot = &*slot + &(a * b);
                }
            }
        }
        out
    }

    pub fn sub_matrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> FMatrix {
        let data = self.data[r0..r1]
            .iter()
            .map(|r| r[c0..c1].to_vec())
            .collect();
        Self::from_rows(&self.field, c1 - c0, data)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().flatten().all(FieldElement::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let v = &self.data[i][j];
                    if i == j {
                        v.is_one()
                    } else {
                        v.is_zero()
                    }
                })
            })
    }

    pub fn rank(&self) -> usize {
        let mut m = self.data.clone();
        row_reduce(&mut m, self.cols).len()
    }

    /// Inverse, or `None` when the matrix is singular or not square.
    pub fn inverse(&self) -> Option<FMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug: Vec<Vec<FieldElement>> = self
            .data
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row = r.clone();
                row.extend((0..n).map(|j| {
                    if i == j {
                        self.field.one()
                    } else {
                        self.field.zero()
                    }
                }));
                row
            })
            .collect();
        let pivots = row_reduce(&mut aug, n);
        if pivots.len() < n {
            return None;
        }
        let data = aug.into_iter().map(|r| r[n..].to_vec()).collect();
        Some(Self::from_rows(&self.field, n, data))
    }

    pub fn determinant(&self) -> FieldElement {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        let mut m = self.data.clone();
        let mut det = self.field.one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
                return self.field.zero();
            };
            if p != c {
                m.swap(p, c);
                det = -det;
            }
            det = &det * &m[c][c];
            let inv = m[c][c].inv().expect("nonzero pivot");
            for r in c + 1..n {
                if m[r][c].is_zero() {
                    continue;
                }
                let f = &m[r][c] * &inv;
                for k in c..n {
                    let t = &f * &m[c][k];
                    m[r][k] = &m[r][k] - &t;
                }
            }
        }
        det
    }
}

/// Reduced row echelon form restricted to the first `cols` columns; returns
/// the pivot columns. Rows are rearranged in place so pivots come first.
pub(crate) fn row_reduce(m: &mut [Vec<FieldElement>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(p, r);
        let inv = m[r][c].inv().expect("nonzero pivot");
        let width = m[r].len();
        for k in 0..width {
            m[r][k] = &m[r][k] * &inv;
        }
        for i in 0..m.len() {
            if i == r || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for k in 0..width {
                if !m[r][k].is_zero() {
                    let t = &f * &m[r][k];
                    m[i][k] = &m[i][k] - &t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

impl fmt::Debug for FMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `[[a,b],[c,d]]`, entries printed as field elements.
impl fmt::Display for FMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.data.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}
