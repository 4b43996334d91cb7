//! Exact rational linear algebra.
//!
//! Everything that decides a dimension, an independence or a validity question goes
//! through this module, so there are no tolerances anywhere in here.

use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary precision rational, always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix shape {rows}x{cols} does not match {len} entries")]
    ShapeMismatch { rows: usize, cols: usize, len: usize },
    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedRows { row: usize, expected: usize, found: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRationalError(pub String);

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `base^exp` for a non-negative exponent.
pub fn pow(base: &Rational, exp: u32) -> Rational {
    num_traits::pow(base.clone(), exp as usize)
}

/// Parses `p/q`, an integer, or an exact decimal such as `-0.999` (which becomes `-999/1000`).
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let s = text.trim();
    let err = || ParseRationalError(text.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, fractional)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = whole.trim_start_matches(['-', '+']);
        if !digits.chars().all(|c| c.is_ascii_digit())
            || !fractional.chars().all(|c| c.is_ascii_digit())
            || (digits.is_empty() && fractional.is_empty())
        {
            return Err(err());
        }
        let joined = format!("{digits}{fractional}");
        let mut num: BigInt = if joined.is_empty() {
            BigInt::zero()
        } else {
            joined.parse().map_err(|_| err())?
        };
        if negative {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), fractional.len());
        return Ok(Rational::new(num, den));
    }
    let n: BigInt = s.parse().map_err(|_| err())?;
    Ok(Rational::from_integer(n))
}

/// Renders `p` or `p/q`; the inverse of [`parse_rational`].
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // num-rational gives up on huge numerators/denominators; fall back to a scaled ratio
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact conversion of a finite double.
pub fn from_f64(v: f64) -> Option<Rational> {
    Rational::from_float(v)
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Scales `v` to coprime integers with the first nonzero entry positive.
/// The zero vector is returned unchanged.
pub fn primitive_integer_form(v: &[Rational]) -> Vec<Rational> {
    let Some(first) = v.iter().find(|x| !x.is_zero()) else {
        return v.to_vec();
    };
    let lcm = v
        .iter()
        .filter(|x| !x.is_zero())
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scaled: Vec<BigInt> = v
        .iter()
        .map(|x| (x * Rational::from_integer(lcm.clone())).to_integer())
        .collect();
    let gcd = scaled
        .iter()
        .filter(|x| !x.is_zero())
        .fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let sign = if first.is_negative() { -BigInt::one() } else { BigInt::one() };
    scaled
        .into_iter()
        .map(|x| Rational::from_integer(x / &gcd * &sign))
        .collect()
}

/// Dense row-major matrix over the rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RationalMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(format_rational).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl RationalMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self, LinalgError> {
        if rows * cols != data.len() {
            return Err(LinalgError::ShapeMismatch { rows, cols, len: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    /// Builds a matrix from rows; `cols` is needed to give a 0-row matrix its width.
    pub fn from_rows(cols: usize, rows: Vec<Vec<Rational>>) -> Result<Self, LinalgError> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        let n = rows.len();
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(LinalgError::RaggedRows { row: i, expected: cols, found: row.len() });
            }
            data.extend(row);
        }
        Ok(Self { rows: n, cols, data })
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let data = rows.iter().flat_map(|r| r.iter().map(|&v| int(v))).collect();
        Self::new(rows.len(), cols, data).expect("ragged literal matrix")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Rational> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c).clone();
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols, "vector length must match column count");
        (0..self.rows).map(|r| dot(self.row(r), v)).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

impl Mul for &RationalMatrix {
    type Output = RationalMatrix;

    fn mul(self, rhs: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = RationalMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let b = rhs.get(k, c);
                    if !b.is_zero() {
                        out.data[r * rhs.cols + c] += a * b;
                    }
                }
            }
        }
        out
    }
}

/// Output of [`rref`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref {
    pub matrix: RationalMatrix,
    pub pivot_cols: Vec<usize>,
    pub rank: usize,
}

/// Reduced row echelon form by Gauss-Jordan elimination.
pub fn rref(m: &RationalMatrix) -> Rref {
    let mut a = m.clone();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        let Some(p) = (r..a.rows).find(|&i| !a.get(i, c).is_zero()) else {
            continue;
        };
        a.swap_rows(r, p);
        let inv = a.get(r, c).recip();
        for k in c..a.cols {
            let v = a.get(r, k) * &inv;
            a.set(r, k, v);
        }
        for i in 0..a.rows {
            if i == r || a.get(i, c).is_zero() {
                continue;
            }
            let factor = a.get(i, c).clone();
            for k in c..a.cols {
                let rk = a.get(r, k);
                if rk.is_zero() {
                    continue;
                }
                let v = a.get(i, k) - &factor * rk;
                a.set(i, k, v);
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let rank = pivot_cols.len();
    Rref { matrix: a, pivot_cols, rank }
}

/// Scales each row to integers (clearing denominators) without changing the row space.
fn integer_rows(rows: impl Iterator<Item = Vec<Rational>>) -> Vec<Vec<BigInt>> {
    rows.map(|row| {
        let lcm = row
            .iter()
            .filter(|x| !x.is_zero())
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        row.iter()
            .map(|x| (x * Rational::from_integer(lcm.clone())).to_integer())
            .collect()
    })
    .filter(|row: &Vec<BigInt>| row.iter().any(|x| !x.is_zero()))
    .collect()
}

/// Fraction-free (Bareiss) elimination over the integers; returns the rank.
fn bareiss_rank(mut a: Vec<Vec<BigInt>>, cols: usize) -> usize {
    let rows = a.len();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let (top, rest) = a.split_at_mut(r + 1);
        let pivot_row = &top[r];
        let pivot = &pivot_row[c];
        for row in rest.iter_mut() {
            let lead = std::mem::take(&mut row[c]);
            for k in c + 1..cols {
                let v = pivot * &row[k] - &lead * &pivot_row[k];
                row[k] = if prev.is_one() { v } else { v / &prev };
            }
        }
        prev = pivot.clone();
        r += 1;
    }
    r
}

/// Exact rank over the rationals.
pub fn rank(m: &RationalMatrix) -> usize {
    rank_of_rows(m.cols, m.row_vecs())
}

/// Exact rank of a list of equal-length rows.
pub fn rank_of_rows(cols: usize, rows: Vec<Vec<Rational>>) -> usize {
    let a = integer_rows(rows.into_iter());
    bareiss_rank(a, cols)
}

/// Basis of `{x : Mx = 0}` as the columns of a `cols(M) x k` matrix.
///
/// One basis vector per free column of the RREF, each scaled to primitive integer form.
pub fn null_space_basis(m: &RationalMatrix) -> RationalMatrix {
    let Rref { matrix: r, pivot_cols, .. } = rref(m);
    let n = m.cols;
    let free: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis = RationalMatrix::zeros(n, free.len());
    for (k, &f) in free.iter().enumerate() {
        let mut v = vec![Rational::zero(); n];
        v[f] = Rational::one();
        for (row, &p) in pivot_cols.iter().enumerate() {
            v[p] = -r.get(row, f).clone();
        }
        for (i, x) in primitive_integer_form(&v).into_iter().enumerate() {
            basis.set(i, k, x);
        }
    }
    basis
}

/// Incrementally built row-echelon basis used for "does this row raise the rank" tests.
#[derive(Debug, Clone)]
pub struct RowBasis {
    cols: usize,
    rows: Vec<(usize, Vec<Rational>)>,
}

impl RowBasis {
    pub fn new(cols: usize) -> Self {
        Self { cols, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, row: &[Rational]) -> Vec<Rational> {
        let mut v = row.to_vec();
        for (p, basis_row) in &self.rows {
            if v[*p].is_zero() {
                continue;
            }
            let factor = v[*p].clone();
            for (x, b) in v.iter_mut().zip(basis_row) {
                if !b.is_zero() {
                    *x -= &factor * b;
                }
            }
        }
        v
    }

    pub fn is_independent(&self, row: &[Rational]) -> bool {
        assert_eq!(row.len(), self.cols);
        self.reduce(row).iter().any(|x| !x.is_zero())
    }

    /// Adds `row` when it is independent of the rows already held; reports whether it was.
    pub fn insert(&mut self, row: &[Rational]) -> bool {
        assert_eq!(row.len(), self.cols);
        let v = self.reduce(row);
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = v[p].recip();
        let v = v.into_iter().map(|x| x * &inv).collect();
        self.rows.push((p, v));
        true
    }
}

/// Mersenne prime used for modular rank bounds.
const MOD_P: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % MOD_P as u128) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    acc
}

fn bigint_mod(x: &BigInt) -> u64 {
    let m = BigInt::from(MOD_P);
    let r = x.mod_floor(&m);
    r.to_u64().expect("residue fits in u64")
}

fn rational_mod(x: &Rational) -> Option<u64> {
    let d = bigint_mod(x.denom());
    if d == 0 {
        return None;
    }
    Some(mulmod(bigint_mod(x.numer()), powmod(d, MOD_P - 2)))
}

/// Rank of the rows reduced modulo a large prime.
///
/// This never exceeds the rational rank, so it is a certified lower bound. `None` when a
/// denominator vanishes modulo the prime.
pub fn rank_lower_bound_mod_p(cols: usize, rows: &[Vec<Rational>]) -> Option<usize> {
    let mut a: Vec<Vec<u64>> = Vec::with_capacity(rows.len());
    for row in rows {
        let mut out = Vec::with_capacity(cols);
        for x in row {
            out.push(rational_mod(x)?);
        }
        a.push(out);
    }
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(r, p);
        let inv = powmod(a[r][c], MOD_P - 2);
        let pivot_row: Vec<u64> = a[r].iter().map(|&v| mulmod(v, inv)).collect();
        for row in a.iter_mut().skip(r + 1) {
            let f = row[c];
            if f == 0 {
                continue;
            }
            for k in c..cols {
                let sub = mulmod(f, pivot_row[k]);
                row[k] = (row[k] + MOD_P - sub) % MOD_P;
            }
        }
        a[r] = pivot_row;
        r += 1;
    }
    Some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> RationalMatrix {
        RationalMatrix::from_i64_rows(rows)
    }

    /// Stasheff difference matrix printed in the worked example (4x13).
    fn stasheff_v() -> RationalMatrix {
        m(&[
            &[0, 0, 3, 3, 3, 2, 0, 3, 2, 0, 3, 1, 1],
            &[0, -2, -3, -3, -4, -4, -4, -5, -5, -4, -5, -5, -5],
            &[-1, -1, -1, 0, -1, -1, 1, 0, 0, 4, 2, 1, 4],
            &[1, 3, 1, 0, 2, 3, 3, 2, 3, 0, 0, 3, 0],
        ])
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rational("0.999").unwrap(), frac(999, 1000));
        assert_eq!(parse_rational("-1.5").unwrap(), frac(-3, 2));
        assert_eq!(parse_rational(".25").unwrap(), frac(1, 4));
        assert_eq!(parse_rational("6/4").unwrap(), frac(3, 2));
        assert_eq!(parse_rational("-7").unwrap(), int(-7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.2.3").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn format_round_trips() {
        for s in ["0", "-3", "7/9", "-999/1000"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
    }

    #[test]
    fn primitive_form_is_coprime_and_positive_first() {
        let v = vec![int(0), frac(-2, 3), frac(4, 3), int(2)];
        assert_eq!(primitive_integer_form(&v), vec![int(0), int(1), int(-2), int(-3)]);
        assert_eq!(primitive_integer_form(&[int(0), int(0)]), vec![int(0), int(0)]);
    }

    #[test]
    fn rref_identity_and_duplicate_rows() {
        let id = RationalMatrix::identity(2);
        let r = rref(&id);
        assert_eq!(r.matrix, id);
        assert_eq!(r.pivot_cols, vec![0, 1]);
        assert_eq!(r.rank, 2);

        let r = rref(&m(&[&[1, 1], &[2, 2]]));
        assert_eq!(r.matrix, m(&[&[1, 1], &[0, 0]]));
        assert_eq!(r.pivot_cols, vec![0]);
        assert_eq!(r.rank, 1);
    }

    #[test]
    fn stasheff_difference_matrix_has_rank_three() {
        assert_eq!(rank(&stasheff_v()), 3);
        assert_eq!(rref(&stasheff_v()).rank, 3);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        assert_eq!(rank(&RationalMatrix::zeros(3, 4)), 0);
        assert_eq!(rref(&RationalMatrix::zeros(3, 4)).rank, 0);
    }

    #[test]
    fn stasheff_null_space_is_all_ones() {
        let basis = null_space_basis(&stasheff_v().transpose());
        assert_eq!(basis.cols(), 1);
        assert_eq!(basis.column(0), vec![int(1), int(1), int(1), int(1)]);
    }

    #[test]
    fn identity_has_trivial_null_space() {
        let basis = null_space_basis(&RationalMatrix::identity(3));
        assert_eq!((basis.rows(), basis.cols()), (3, 0));
    }

    #[test]
    fn zero_row_matrix_null_space_is_everything() {
        let zero_rows = RationalMatrix::zeros(0, 3);
        let basis = null_space_basis(&zero_rows);
        assert_eq!(basis, RationalMatrix::identity(3));
    }

    #[test]
    fn row_basis_tracks_rank() {
        let mut b = RowBasis::new(3);
        assert!(b.insert(&[int(1), int(1), int(0)]));
        assert!(!b.insert(&[int(2), int(2), int(0)]));
        assert!(b.insert(&[int(0), int(1), int(1)]));
        assert!(!b.is_independent(&[int(1), int(2), int(1)]));
        assert!(b.is_independent(&[int(0), int(0), int(1)]));
        assert_eq!(b.rank(), 2);
    }

    #[test]
    fn modular_rank_matches_exact_on_small_cases() {
        let v = stasheff_v();
        assert_eq!(rank_lower_bound_mod_p(v.cols(), &v.row_vecs()), Some(3));
        let rows = vec![vec![frac(1, 3), frac(2, 7)], vec![frac(2, 3), frac(4, 7)]];
        assert_eq!(rank_lower_bound_mod_p(2, &rows), Some(1));
    }
}
