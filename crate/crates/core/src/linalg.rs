//! Exact rational linear algebra: sparse reduced row echelon forms and small
//! dense inverses.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Coeff = BigRational;

/// A sparse row indexed by column keys.
pub type Row<K> = BTreeMap<K, Coeff>;

/// Serializes a coefficient as its decimal fraction text.
pub fn serialize_coeff<S: serde::Serializer>(c: &Coeff, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&c.to_string())
}

pub fn int(n: i64) -> Coeff {
    BigRational::from_integer(BigInt::from(n))
}

/// `target += factor * source`, dropping zeros.
pub fn axpy<K: Ord + Clone>(target: &mut Row<K>, factor: &Coeff, source: &Row<K>) {
    for (k, v) in source {
        let add = factor * v;
        match target.get_mut(k) {
            Some(x) => {
                *x += add;
                if x.is_zero() {
                    target.remove(k);
                }
            }
            None => {
                if !add.is_zero() {
                    target.insert(k.clone(), add);
                }
            }
        }
    }
}

/// The positive rational `c` such that `row / c` has coprime integer entries
/// and keeps the signs of `row`.
pub fn content<'a>(values: impl Iterator<Item = &'a Coeff>) -> Coeff {
    let mut num_gcd = BigInt::zero();
    let mut den_lcm = BigInt::one();
    for v in values {
        num_gcd = num_gcd.gcd(v.numer());
        den_lcm = den_lcm.lcm(v.denom());
    }
    if num_gcd.is_zero() {
        return Coeff::one();
    }
    BigRational::new(num_gcd.abs(), den_lcm)
}

#[derive(Clone, Debug)]
struct EchelonRow<K> {
    row: Row<K>,
    combo: Row<usize>,
}

/// Reduced row echelon form kept incrementally. The pivot of a row is its
/// smallest key; pivots are normalized to 1 and cleared from every other row.
///
/// Each row optionally records the combination of inserted inputs it came
/// from, which serves as a membership witness.
#[derive(Clone, Debug)]
pub struct Echelon<K: Ord + Clone> {
    rows: BTreeMap<K, EchelonRow<K>>,
}

impl<K: Ord + Clone> Default for Echelon<K> {
    fn default() -> Self {
        Echelon { rows: BTreeMap::new() }
    }
}

impl<K: Ord + Clone> Echelon<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = &K> {
        self.rows.keys()
    }

    /// Rows in increasing pivot order.
    pub fn rows(&self) -> impl Iterator<Item = &Row<K>> {
        self.rows.values().map(|r| &r.row)
    }

    pub fn into_rows(self) -> Vec<Row<K>> {
        self.rows.into_values().map(|r| r.row).collect()
    }

    fn reduce_tracked(&self, mut row: Row<K>, mut combo: Row<usize>) -> (Row<K>, Row<usize>) {
        let hits: Vec<K> = row.keys().filter(|k| self.rows.contains_key(*k)).cloned().collect();
        for k in hits {
            if let Some(c) = row.get(&k).cloned() {
                let r = &self.rows[&k];
                let f = -c;
                axpy(&mut row, &f, &r.row);
                axpy(&mut combo, &f, &r.combo);
            }
        }
        (row, combo)
    }

    /// Remainder of `row` modulo the row space.
    pub fn reduce(&self, row: Row<K>) -> Row<K> {
        self.reduce_tracked(row, Row::new()).0
    }

    pub fn contains(&self, row: &Row<K>) -> bool {
        self.reduce(row.clone()).is_empty()
    }

    /// Expresses `row` through the tagged inputs, if it lies in the span.
    pub fn witness(&self, row: &Row<K>) -> Option<Row<usize>> {
        let (rem, combo) = self.reduce_tracked(row.clone(), Row::new());
        if rem.is_empty() {
            Some(combo.into_iter().map(|(k, v)| (k, -v)).collect())
        } else {
            None
        }
    }

    pub fn insert(&mut self, row: Row<K>) -> bool {
        self.insert_tracked(row, Row::new())
    }

    /// Inserts `row`, recording it as input `tag` for witnesses.
    pub fn insert_tagged(&mut self, row: Row<K>, tag: usize) -> bool {
        let mut combo = Row::new();
        combo.insert(tag, Coeff::one());
        self.insert_tracked(row, combo)
    }

    fn insert_tracked(&mut self, row: Row<K>, combo: Row<usize>) -> bool {
        let (mut row, mut combo) = self.reduce_tracked(row, combo);
        let Some((pivot, lead)) = row.iter().next().map(|(k, v)| (k.clone(), v.clone())) else {
            return false;
        };
        let inv = lead.recip();
        for v in row.values_mut() {
            *v *= &inv;
        }
        for v in combo.values_mut() {
            *v *= &inv;
        }
        for other in self.rows.values_mut() {
            if let Some(c) = other.row.get(&pivot).cloned() {
                let f = -c;
                axpy(&mut other.row, &f, &row);
                axpy(&mut other.combo, &f, &combo);
            }
        }
        self.rows.insert(pivot, EchelonRow { row: std::mem::take(&mut row), combo: std::mem::take(&mut combo) });
        true
    }
}

/// Inverse of a square matrix, or `None` if it is singular.
pub fn invert(matrix: &[Vec<Coeff>]) -> Option<Vec<Vec<Coeff>>> {
    let n = matrix.len();
    if matrix.iter().any(|r| r.len() != n) {
        return None;
    }
    let mut a: Vec<Vec<Coeff>> = matrix
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { Coeff::one() } else { Coeff::zero() }));
            row
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, p);
        let inv = a[col][col].recip();
        for v in a[col].iter_mut() {
            *v *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..2 * n {
                    let sub = &f * &a[col][c];
                    a[r][c] -= sub;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(entries: &[(u32, i64)]) -> Row<u32> {
        entries.iter().map(|&(k, v)| (k, int(v))).collect()
    }

    #[test]
    fn echelon_rank_and_membership() {
        let mut e = Echelon::new();
        assert!(e.insert_tagged(row(&[(0, 1), (1, 1)]), 0));
        assert!(e.insert_tagged(row(&[(1, 1), (2, 1)]), 1));
        assert!(!e.insert_tagged(row(&[(0, 1), (1, 2), (2, 1)]), 2));
        assert_eq!(e.rank(), 2);
        let target = row(&[(0, 2), (1, 3), (2, 1)]);
        let w = e.witness(&target).unwrap();
        let mut rebuilt = Row::new();
        axpy(&mut rebuilt, &w[&0], &row(&[(0, 1), (1, 1)]));
        axpy(&mut rebuilt, &w[&1], &row(&[(1, 1), (2, 1)]));
        assert_eq!(rebuilt, target);
        assert!(e.witness(&row(&[(2, 1)])).is_none());
    }

    #[test]
    fn rows_are_reduced() {
        let mut e = Echelon::new();
        e.insert(row(&[(1, 2), (3, 4)]));
        e.insert(row(&[(0, 1), (1, 1)]));
        let rows: Vec<_> = e.rows().cloned().collect();
        assert_eq!(rows[0], row(&[(0, 1), (3, -2)]));
        assert_eq!(rows[1], row(&[(1, 1), (3, 2)]));
    }

    #[test]
    fn inverse_of_small_matrix() {
        let m = vec![vec![int(1), int(1)], vec![int(1), int(-1)]];
        let inv = invert(&m).unwrap();
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(inv, vec![vec![half.clone(), half.clone()], vec![half.clone(), -half]]);
        assert!(invert(&[vec![int(1), int(2)], vec![int(2), int(4)]]).is_none());
    }

    #[test]
    fn content_is_positive() {
        let vals = [BigRational::new((-3).into(), 2.into()), int(6)];
        assert_eq!(content(vals.iter()), BigRational::new(3.into(), 2.into()));
    }
}
